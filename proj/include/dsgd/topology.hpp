#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace dsgd {

/// Symmetric doubly-stochastic weights over the communication graph. The
/// neighbor list of agent i holds every j with w_ij > 0, i included, in
/// increasing index order.
class MixingMatrix {
 public:
  /// Takes a dense row-major n x n matrix. Does not validate; see validate().
  MixingMatrix(std::size_t n, std::vector<double> weights);

  std::size_t size() const noexcept { return n_; }
  double weight(std::size_t i, std::size_t j) const noexcept { return weights_[i * n_ + j]; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }
  const std::vector<double>& dense() const noexcept { return weights_; }

  friend bool operator==(const MixingMatrix& a, const MixingMatrix& b) {
    return a.n_ == b.n_ && a.weights_ == b.weights_;
  }

 private:
  std::size_t n_;
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

/// Undirected ring: 1/3 on i-1, i, i+1 for n >= 3; 1/2 self + 1/2 other for
/// n = 2; [[1]] for n = 1.
MixingMatrix build_ring(std::size_t n);

/// Uniform 1/n everywhere.
MixingMatrix build_complete(std::size_t n);

enum class Violation { asymmetric, row_sum, column_sum, negative_entry, missing_self_loop, disconnected };

std::string to_string(Violation v);

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> details;

  bool ok() const noexcept { return violations.empty(); }
  bool has(Violation v) const noexcept;
};

inline constexpr double kStochasticTolerance = 1e-12;

/// Checks symmetry, row/column sums (within 1e-12), sign, self-loops and
/// connectivity (BFS over positive-weight edges).
ValidationReport validate(const MixingMatrix& w);

/// Plain-text format: first token n, then n rows of n decimals.
MixingMatrix read_mixing_matrix(std::istream& in);
MixingMatrix load_mixing_matrix(const std::string& path);
void write_mixing_matrix(std::ostream& out, const MixingMatrix& w);

}  // namespace dsgd
