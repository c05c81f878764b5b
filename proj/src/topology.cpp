#include "dsgd/topology.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "dsgd/errors.hpp"

namespace dsgd {

MixingMatrix::MixingMatrix(std::size_t n, std::vector<double> weights)
    : n_(n), weights_(std::move(weights)), neighbors_(n) {
  if (n == 0) throw std::invalid_argument("mixing matrix needs at least one agent");
  if (weights_.size() != n * n) {
    throw DimensionError("mixing matrix expects " + std::to_string(n * n) + " weights, got " +
                         std::to_string(weights_.size()));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (weight(i, j) > 0.0 || i == j) neighbors_[i].push_back(j);
    }
  }
}

MixingMatrix build_ring(std::size_t n) {
  if (n == 0) throw std::invalid_argument("build_ring: n must be positive");
  if (n <= 3) return build_complete(n);
  std::vector<double> w(n * n, 0.0);
  const double third = 1.0 / 3.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i * n + (i + n - 1) % n] = third;
    w[i * n + i] = third;
    w[i * n + (i + 1) % n] = third;
  }
  return MixingMatrix(n, std::move(w));
}

MixingMatrix build_complete(std::size_t n) {
  if (n == 0) throw std::invalid_argument("build_complete: n must be positive");
  return MixingMatrix(n, std::vector<double>(n * n, 1.0 / static_cast<double>(n)));
}

std::string to_string(Violation v) {
  switch (v) {
    case Violation::asymmetric: return "asymmetric";
    case Violation::row_sum: return "row_sum";
    case Violation::column_sum: return "column_sum";
    case Violation::negative_entry: return "negative_entry";
    case Violation::missing_self_loop: return "missing_self_loop";
    case Violation::disconnected: return "disconnected";
  }
  return "unknown";
}

bool ValidationReport::has(Violation v) const noexcept {
  for (auto x : violations) {
    if (x == v) return true;
  }
  return false;
}

ValidationReport validate(const MixingMatrix& w) {
  ValidationReport report;
  const std::size_t n = w.size();
  auto flag = [&](Violation v, std::string detail) {
    if (!report.has(v)) report.violations.push_back(v);
    report.details.push_back(std::move(detail));
  };
  auto pair_str = [](std::size_t i, std::size_t j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
  };

  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    double col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += w.weight(i, j);
      col += w.weight(j, i);
      if (w.weight(i, j) != w.weight(j, i) && i < j) {
        flag(Violation::asymmetric, "w" + pair_str(i, j) + " != w" + pair_str(j, i));
      }
      if (w.weight(i, j) < 0.0 || !std::isfinite(w.weight(i, j))) {
        flag(Violation::negative_entry, "w" + pair_str(i, j) + " is negative or non-finite");
      }
    }
    if (std::abs(row - 1.0) > kStochasticTolerance) {
      flag(Violation::row_sum, "row " + std::to_string(i) + " sums to " + std::to_string(row));
    }
    if (std::abs(col - 1.0) > kStochasticTolerance) {
      flag(Violation::column_sum, "column " + std::to_string(i) + " sums to " + std::to_string(col));
    }
    if (!(w.weight(i, i) > 0.0)) {
      flag(Violation::missing_self_loop, "w" + pair_str(i, i) + " is not positive");
    }
  }

  // Edges count in either direction so an asymmetric matrix is still judged
  // on its undirected support.
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  seen[0] = true;
  frontier.push(0);
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    for (std::size_t j = 0; j < n; ++j) {
      if (!seen[j] && (w.weight(i, j) > 0.0 || w.weight(j, i) > 0.0)) {
        seen[j] = true;
        ++reached;
        frontier.push(j);
      }
    }
  }
  if (reached != n) {
    flag(Violation::disconnected,
         "only " + std::to_string(reached) + " of " + std::to_string(n) + " agents reachable from agent 0");
  }
  return report;
}

MixingMatrix read_mixing_matrix(std::istream& in) {
  long long n = 0;
  if (!(in >> n) || n <= 0) throw std::invalid_argument("mixing matrix file: bad agent count");
  const auto size = static_cast<std::size_t>(n);
  std::vector<double> w(size * size);
  for (auto& x : w) {
    if (!(in >> x)) throw std::invalid_argument("mixing matrix file: expected " + std::to_string(size * size) + " weights");
  }
  std::string trailing;
  if (in >> trailing) throw std::invalid_argument("mixing matrix file: trailing data '" + trailing + "'");
  return MixingMatrix(size, std::move(w));
}

MixingMatrix load_mixing_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mixing matrix file: " + path);
  return read_mixing_matrix(in);
}

void write_mixing_matrix(std::ostream& out, const MixingMatrix& w) {
  out << w.size() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", w.weight(i, j));
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace dsgd
