#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sociallearn {

// Row-stochastic weight matrix of the communication network.
//
// Edge convention: weight(i, j) > 0 means node j sends to node i, i.e. j is
// an in-neighbour of i and row i holds the confidence node i places on each
// of its sources. Read as a Markov chain the same matrix moves i -> j with
// probability weight(i, j); reachability, period and cyclic classes below are
// all stated in that chain sense. Strong connectivity and the period do not
// depend on which of the two directions is used.
class StochasticMatrix {
public:
  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {w_.data() + i * n_, n_}; }

  // In-neighbours of node i (j with W_ij > 0), self included when W_ii > 0.
  std::vector<std::size_t> sources(std::size_t i) const;

  StochasticMatrix power(unsigned t) const;
  StochasticMatrix permuted(std::span<const std::size_t> perm) const;

private:
  friend StochasticMatrix validate_stochastic(const std::vector<std::vector<double>>& raw);
  StochasticMatrix(std::size_t n, std::vector<double> w) : n_(n), w_(std::move(w)) {}

  std::size_t n_ = 0;
  std::vector<double> w_;
};

inline constexpr double kStochasticTolerance = 1e-9;
inline constexpr double kEigenResidualTolerance = 1e-10;

// Checks squareness, nonnegativity and unit row sums (within 1e-9); rows that
// pass are renormalized exactly.
StochasticMatrix validate_stochastic(const std::vector<std::vector<double>>& raw);

bool is_strongly_connected(const StochasticMatrix& m);

// gcd of the directed cycle lengths; 1 means aperiodic.
unsigned period(const StochasticMatrix& m);

struct GraphStructure {
  bool strongly_connected = false;
  unsigned period = 0;
  // cyclic_classes[r - 1] = { j : W^(m d + r)(ref, j) > 0 for some m }, r = 1..d.
  std::vector<std::vector<std::size_t>> cyclic_classes;
};

GraphStructure cyclic_classes(const StochasticMatrix& m, std::size_t ref_node);

// Normalized left eigenvector v = vW, solved directly so periodic chains work.
std::vector<double> stationary_distribution(const StochasticMatrix& m);

// 5x5-style grid with W_ij = 1/|N(i)| over the lattice neighbours (no self loops).
std::vector<std::vector<double>> grid_weights(std::size_t rows, std::size_t cols);

}  // namespace sociallearn
