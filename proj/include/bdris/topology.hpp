#ifndef BDRIS_TOPOLOGY_HPP
#define BDRIS_TOPOLOGY_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bdris {

using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class TopologyKind { kSingle, kGroup, kTridiagonal, kBand, kGeneralized, kFully };

// Which RIS element pairs are joined by a tunable admittance.
class Topology {
public:
  static Topology single(int n_i);
  static Topology group(int n_i, int group_count);
  static Topology tridiagonal(int n_i);
  static Topology band(int n_i, int q);
  // permutation[k] is the element placed at band position k.
  static Topology generalized(int n_i, std::vector<int> permutation, int q);
  static Topology fully(int n_i);

  // "single" | "group:G" | "tridiagonal" | "band:q" | "fully"
  static Topology parse(const std::string& spec, int n_i);

  TopologyKind kind() const { return kind_; }
  int n_i() const { return static_cast<int>(mask_.rows()); }
  // Group count for kGroup, bandwidth for kBand / kGeneralized / kTridiagonal.
  int parameter() const { return parameter_; }
  const std::vector<int>& permutation() const { return permutation_; }
  const Mask& mask() const { return mask_; }
  bool allows(int i, int j) const { return mask_(i, j); }

  // Free parameters: mask entries on or above the diagonal.
  int admittance_count() const;
  std::string name() const;

private:
  Topology(TopologyKind kind, int parameter, Mask mask, std::vector<int> permutation = {});

  TopologyKind kind_;
  int parameter_;
  Mask mask_;
  std::vector<int> permutation_;
};

inline int admittance_count(const Topology& t) { return t.admittance_count(); }

// Smallest band that matches the fully-connected channel-shaping capability:
// 2 min(min(n_t, n_r), n_i / 2) - 1, capped at n_i - 1.
int optimal_bandwidth(int n_t, int n_r, int n_i);

}  // namespace bdris

#endif  // BDRIS_TOPOLOGY_HPP
