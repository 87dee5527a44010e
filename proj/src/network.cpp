#include "sociallearn/network.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include <Eigen/Dense>

#include "sociallearn/error.hpp"

namespace sociallearn {

namespace {

std::vector<std::size_t> bfs_levels(const StochasticMatrix& m, std::size_t src, bool forward) {
  const std::size_t n = m.size();
  constexpr std::size_t unseen = static_cast<std::size_t>(-1);
  std::vector<std::size_t> level(n, unseen);
  std::queue<std::size_t> q;
  level[src] = 0;
  q.push(src);
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t v = 0; v < n; ++v) {
      const double w = forward ? m(u, v) : m(v, u);
      if (w > 0.0 && level[v] == unseen) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  return level;
}

void require_connected(const StochasticMatrix& m) {
  if (!is_strongly_connected(m)) {
    throw Error(ErrorCode::NotStronglyConnected, "weight matrix graph is not strongly connected");
  }
}

}  // namespace

std::vector<std::size_t> StochasticMatrix::sources(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n_; ++j)
    if ((*this)(i, j) > 0.0) out.push_back(j);
  return out;
}

StochasticMatrix StochasticMatrix::power(unsigned t) const {
  std::vector<double> acc(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) acc[i * n_ + i] = 1.0;
  for (unsigned s = 0; s < t; ++s) {
    std::vector<double> next(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < n_; ++k) {
        const double a = acc[i * n_ + k];
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < n_; ++j) next[i * n_ + j] += a * w_[k * n_ + j];
      }
    acc = std::move(next);
  }
  return StochasticMatrix(n_, std::move(acc));
}

StochasticMatrix StochasticMatrix::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != n_) throw Error(ErrorCode::DimensionMismatch, "permutation size");
  // Node perm[i] of the original becomes node i.
  std::vector<double> out(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i * n_ + j] = (*this)(perm[i], perm[j]);
  return StochasticMatrix(n_, std::move(out));
}

StochasticMatrix validate_stochastic(const std::vector<std::vector<double>>& raw) {
  const std::size_t n = raw.size();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "weight matrix is empty");
  std::vector<double> w;
  w.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i].size() != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  "row " + std::to_string(i) + " has " + std::to_string(raw[i].size()) +
                      " entries, expected " + std::to_string(n));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = raw[i][j];
      if (!std::isfinite(x) || x < 0.0) {
        throw Error(ErrorCode::NegativeWeight,
                    "W(" + std::to_string(i) + "," + std::to_string(j) + ") = " + std::to_string(x));
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      throw Error(ErrorCode::RowSumViolation,
                  "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    for (std::size_t j = 0; j < n; ++j) w.push_back(raw[i][j] / sum);
  }
  return StochasticMatrix(n, std::move(w));
}

bool is_strongly_connected(const StochasticMatrix& m) {
  constexpr std::size_t unseen = static_cast<std::size_t>(-1);
  for (bool forward : {true, false}) {
    for (std::size_t lv : bfs_levels(m, 0, forward))
      if (lv == unseen) return false;
  }
  return true;
}

unsigned period(const StochasticMatrix& m) {
  require_connected(m);
  const std::size_t n = m.size();
  const auto level = bfs_levels(m, 0, true);
  long long g = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      if (m(u, v) <= 0.0) continue;
      const long long diff =
          static_cast<long long>(level[u]) + 1 - static_cast<long long>(level[v]);
      g = std::gcd(g, diff < 0 ? -diff : diff);
    }
  return static_cast<unsigned>(g == 0 ? 1 : g);
}

GraphStructure cyclic_classes(const StochasticMatrix& m, std::size_t ref_node) {
  if (ref_node >= m.size()) throw Error(ErrorCode::InvalidArgument, "reference node out of range");
  GraphStructure out;
  out.strongly_connected = is_strongly_connected(m);
  require_connected(m);
  out.period = period(m);
  const unsigned d = out.period;
  const auto level = bfs_levels(m, ref_node, true);
  out.cyclic_classes.assign(d, {});
  for (std::size_t j = 0; j < m.size(); ++j) {
    // Step counts from ref to j are all congruent to level[j] mod d.
    const std::size_t r = (level[j] + d - 1) % d;
    out.cyclic_classes[r].push_back(j);
  }
  return out;
}

std::vector<double> stationary_distribution(const StochasticMatrix& m) {
  require_connected(m);
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) = m(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) - (i == j ? 1.0 : 0.0);
  // (W^T - I) has rank n-1 with its rows summing to zero, so one row is
  // redundant; swapping it for the normalization row gives a regular system.
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd v = a.fullPivLu().solve(rhs);

  std::vector<double> out(v.data(), v.data() + n);
  double residual = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double vw = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) vw += out[j] * m(j, i);
    residual = std::max(residual, std::abs(vw - out[i]));
    if (!(out[i] > 0.0)) {
      throw Error(ErrorCode::NotStronglyConnected, "stationary vector has a nonpositive entry");
    }
  }
  if (residual > kEigenResidualTolerance) {
    throw Error(ErrorCode::InvalidArgument,
                "stationary vector residual " + std::to_string(residual) + " above tolerance");
  }
  return out;
}

std::vector<std::vector<double>> grid_weights(std::size_t rows, std::size_t cols) {
  const std::size_t n = rows * cols;
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      std::vector<std::size_t> nb;
      if (r > 0) nb.push_back((r - 1) * cols + c);
      if (r + 1 < rows) nb.push_back((r + 1) * cols + c);
      if (c > 0) nb.push_back(r * cols + c - 1);
      if (c + 1 < cols) nb.push_back(r * cols + c + 1);
      const std::size_t i = r * cols + c;
      for (std::size_t j : nb) w[i][j] = 1.0 / static_cast<double>(nb.size());
    }
  return w;
}

}  // namespace sociallearn
