#ifndef BDRIS_SYMFIT_HPP
#define BDRIS_SYMFIT_HPP

#include <optional>

#include "bdris/channels.hpp"
#include "bdris/topology.hpp"
#include "bdris/types.hpp"

namespace bdris {

// Masked symmetric matrix <-> free parameters, ordered row by row over mask
// entries (i, j) with j >= i.
RVector pack_free_variables(const RMatrix& b, const Topology& topology);
RMatrix unpack_free_variables(const RVector& x, const Topology& topology);

// minimize rho/2 ||L B R - gamma1||_F^2 + xi/2 ||L B L - gamma2||_F^2
// over real symmetric B supported on the topology mask.
struct SymFitProblem {
  RMatrix l_factor;  // n_i x n_i
  RMatrix r_factor;  // n_i x m
  RMatrix gamma1;    // n_i x m
  RMatrix gamma2;    // n_i x n_i, only read when xi > 0
  double rho = 1.0;
  double xi = 0.0;
  Topology topology = Topology::fully(1);
  // When the minimizer is not unique, return the one nearest to this matrix.
  std::optional<RMatrix> reference;
};

struct SymFitResult {
  RMatrix b;
  double objective = 0.0;
  int free_variables = 0;
  int rank = 0;                 // numerical rank of the data matrix (xi = 0 only)
  bool rank_deficient = false;  // minimizer not unique; nearest-to-reference chosen
  bool regularized = false;     // ridge added to the normal equations
};

double symfit_objective(const SymFitProblem& problem, const RMatrix& b);

SymFitResult solve_symfit(const SymFitProblem& problem);

}  // namespace bdris

#endif  // BDRIS_SYMFIT_HPP
