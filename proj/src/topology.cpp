#include "bdris/topology.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "bdris/types.hpp"

namespace bdris {

namespace {

Mask band_mask(int n_i, int q) {
  Mask m(n_i, n_i);
  for (int i = 0; i < n_i; ++i) {
    for (int j = 0; j < n_i; ++j) m(i, j) = std::abs(i - j) <= q;
  }
  return m;
}

void check_size(int n_i) {
  if (n_i < 1) throw InvalidArgument("n_i must be >= 1");
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (pos != text.size()) throw InvalidArgument("");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("invalid " + what + " '" + text + "'");
  }
}

}  // namespace

Topology::Topology(TopologyKind kind, int parameter, Mask mask, std::vector<int> permutation)
    : kind_(kind), parameter_(parameter), mask_(std::move(mask)), permutation_(std::move(permutation)) {}

Topology Topology::single(int n_i) {
  check_size(n_i);
  return Topology(TopologyKind::kSingle, 0, band_mask(n_i, 0));
}

Topology Topology::group(int n_i, int group_count) {
  check_size(n_i);
  if (group_count < 1 || n_i % group_count != 0) {
    throw InvalidArgument("group count must divide n_i");
  }
  const int size = n_i / group_count;
  Mask m(n_i, n_i);
  for (int i = 0; i < n_i; ++i) {
    for (int j = 0; j < n_i; ++j) m(i, j) = (i / size) == (j / size);
  }
  return Topology(TopologyKind::kGroup, group_count, m);
}

Topology Topology::tridiagonal(int n_i) {
  check_size(n_i);
  return Topology(TopologyKind::kTridiagonal, 1, band_mask(n_i, 1));
}

Topology Topology::band(int n_i, int q) {
  check_size(n_i);
  if (q < 0 || q > n_i - 1) throw InvalidArgument("bandwidth must lie in [0, n_i - 1]");
  return Topology(TopologyKind::kBand, q, band_mask(n_i, q));
}

Topology Topology::generalized(int n_i, std::vector<int> permutation, int q) {
  check_size(n_i);
  if (q < 0 || q > n_i - 1) throw InvalidArgument("bandwidth must lie in [0, n_i - 1]");
  if (static_cast<int>(permutation.size()) != n_i) throw InvalidArgument("permutation length must be n_i");
  std::vector<int> sorted = permutation;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < n_i; ++k) {
    if (sorted[k] != k) throw InvalidArgument("not a permutation of 0..n_i-1");
  }
  Mask m(n_i, n_i);
  m.setConstant(false);
  for (int a = 0; a < n_i; ++a) {
    for (int b = 0; b < n_i; ++b) {
      if (std::abs(a - b) <= q) m(permutation[a], permutation[b]) = true;
    }
  }
  return Topology(TopologyKind::kGeneralized, q, m, std::move(permutation));
}

Topology Topology::fully(int n_i) {
  check_size(n_i);
  Mask m(n_i, n_i);
  m.setConstant(true);
  return Topology(TopologyKind::kFully, n_i - 1, m);
}

Topology Topology::parse(const std::string& spec, int n_i) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "single" && arg.empty()) return single(n_i);
  if (head == "tridiagonal" && arg.empty()) return tridiagonal(n_i);
  if (head == "fully" && arg.empty()) return fully(n_i);
  if (head == "group" && !arg.empty()) return group(n_i, parse_int(arg, "group count"));
  if (head == "band" && !arg.empty()) return band(n_i, parse_int(arg, "bandwidth"));
  throw InvalidArgument("unknown topology '" + spec + "'");
}

int Topology::admittance_count() const {
  int count = 0;
  for (int i = 0; i < n_i(); ++i) {
    for (int j = i; j < n_i(); ++j) count += mask_(i, j) ? 1 : 0;
  }
  return count;
}

std::string Topology::name() const {
  switch (kind_) {
    case TopologyKind::kSingle: return "single";
    case TopologyKind::kGroup: return "group:" + std::to_string(parameter_);
    case TopologyKind::kTridiagonal: return "tridiagonal";
    case TopologyKind::kBand: return "band:" + std::to_string(parameter_);
    case TopologyKind::kGeneralized: return "generalized:" + std::to_string(parameter_);
    case TopologyKind::kFully: return "fully";
  }
  return "unknown";
}

int optimal_bandwidth(int n_t, int n_r, int n_i) {
  if (n_t < 1 || n_r < 1 || n_i < 1) throw InvalidArgument("counts must be >= 1");
  return std::min(2 * std::min(n_t, n_r) - 1, n_i - 1);
}

}  // namespace bdris
