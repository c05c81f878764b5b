#include "dsgd/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dsgd/errors.hpp"
#include "dsgd/rng.hpp"

namespace dsgd {

void Samples::push_back(std::span<const double> x, int label) {
  if (x.size() != dim) throw DimensionError("sample has " + std::to_string(x.size()) + " features, expected " + std::to_string(dim));
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

Dataset generate_blobs(int num_classes, std::size_t per_class, std::size_t dim, double spread,
                       std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("generate_blobs: need at least 2 classes");
  if (per_class < 1) throw std::invalid_argument("generate_blobs: per_class must be positive");
  if (dim < 1) throw std::invalid_argument("generate_blobs: dim must be positive");
  if (!(spread > 0.0) || !std::isfinite(spread)) throw std::invalid_argument("generate_blobs: spread must be positive");

  Engine rng = make_engine({seed, tag(Stream::data)});
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> means(static_cast<std::size_t>(num_classes) * dim);
  for (double& m : means) m = normal(rng);

  Samples all;
  all.dim = dim;
  std::vector<double> x(dim);
  for (int c = 0; c < num_classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      for (std::size_t k = 0; k < dim; ++k) x[k] = means[static_cast<std::size_t>(c) * dim + k] + spread * normal(rng);
      all.push_back(x, c);
    }
  }

  const std::size_t m = all.size();
  for (std::size_t k = 0; k < dim; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += all.features[i * dim + k];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = all.features[i * dim + k] - mean;
      var += d * d;
    }
    var /= static_cast<double>(m);
    const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      auto& f = all.features[i * dim + k];
      f = (f - mean) * scale;
    }
  }
  return split_stratified(all, num_classes, seed);
}

Dataset split_stratified(const Samples& all, int num_classes, std::uint64_t seed) {
  if (num_classes < 1) throw std::invalid_argument("split_stratified: num_classes must be positive");
  Dataset out;
  out.num_classes = num_classes;
  out.train.dim = out.validation.dim = out.test.dim = all.dim;

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int c = all.labels[i];
    if (c < 0 || c >= num_classes) throw std::invalid_argument("label " + std::to_string(c) + " out of range");
    by_class[static_cast<std::size_t>(c)].push_back(i);
  }

  Engine rng = make_engine({seed, tag(Stream::split)});
  for (auto& idx : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t held = idx.size() / 10;
    const std::size_t n_train = idx.size() - 2 * held;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      Samples& dst = r < n_train ? out.train : (r < n_train + held ? out.validation : out.test);
      dst.push_back(all.row(idx[r]), all.labels[idx[r]]);
    }
  }
  return out;
}

Samples parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: missing header row");
  std::size_t columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2) throw std::invalid_argument("csv: need at least one feature column and a label column");

  Samples out;
  out.dim = columns - 1;
  std::vector<double> row(out.dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::size_t col = 0;
    int label = -1;
    while (std::getline(fields, cell, ',')) {
      std::size_t used = 0;
      try {
        if (col < out.dim) {
          row[col] = std::stod(cell, &used);
        } else if (col == out.dim) {
          label = std::stoi(cell, &used);
        }
      } catch (const std::exception&) {
        used = 0;
      }
      if (col > out.dim || used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos) {
        throw std::invalid_argument("csv line " + std::to_string(line_no) + ": bad field '" + cell + "'");
      }
      ++col;
    }
    if (col != columns) throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " fields");
    if (label < 0) throw std::invalid_argument("csv line " + std::to_string(line_no) + ": negative label");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("csv line " + std::to_string(line_no) + ": non-finite feature");
    }
    out.push_back(row, label);
  }
  if (out.size() == 0) throw std::invalid_argument("csv: no data rows");
  return out;
}

Samples load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open dataset csv: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::vector<double> sample_dirichlet(double alpha, std::size_t n, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw std::invalid_argument("dirichlet: alpha must be positive");
  if (n == 0) throw std::invalid_argument("dirichlet: dimension must be positive");
  Engine rng(seed);
  // Gamma(a) = Gamma(a + 1) * U^(1/a), evaluated as a logarithm.
  std::gamma_distribution<double> gamma(alpha + 1.0, 1.0);
  std::vector<double> logs(n);
  for (auto& l : logs) {
    const double u = 1.0 - std::generate_canonical<double, 64>(rng);  // (0, 1]
    l = std::log(gamma(rng)) + std::log(u) / alpha;
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  std::vector<double> p(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    p[j] = std::exp(logs[j] - top);
    total += p[j];
  }
  for (double& x : p) x /= total;
  return p;
}

std::vector<std::size_t> apportion(std::span<const double> proportions, std::size_t total) {
  const std::size_t n = proportions.size();
  std::vector<std::size_t> counts(n, 0);
  std::vector<double> remainder(n, 0.0);
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double exact = proportions[j] * static_cast<double>(total);
    const double whole = std::floor(exact);
    counts[j] = static_cast<std::size_t>(whole);
    remainder[j] = exact - whole;
    assigned += counts[j];
  }
  // Floating error can push the floors one past total; trim from the top.
  while (assigned > total) {
    auto j = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    --counts[j];
    --assigned;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t r = 0; assigned < total; r = (r + 1) % n) {
    ++counts[order[r]];
    ++assigned;
  }
  return counts;
}

Partition dirichlet_partition(std::span<const int> labels, std::size_t agents, double alpha,
                              std::uint64_t seed) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("dirichlet_partition: alpha must be positive");
  if (agents == 0) throw std::invalid_argument("dirichlet_partition: need at least one agent");
  if (labels.empty()) throw std::invalid_argument("dirichlet_partition: no labels");
  if (agents > labels.size()) {
    throw InfeasibleError("cannot give " + std::to_string(agents) + " agents a nonempty shard from " +
                          std::to_string(labels.size()) + " samples");
  }

  int num_classes = 0;
  for (int c : labels) {
    if (c < 0) throw std::invalid_argument("dirichlet_partition: negative label");
    num_classes = std::max(num_classes, c + 1);
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);

  Partition out;
  out.shards.resize(agents);
  Engine shuffler = make_engine({seed, tag(Stream::partition)});
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    std::shuffle(idx.begin(), idx.end(), shuffler);
    const auto p = sample_dirichlet(alpha, agents, derive_seed({seed, tag(Stream::partition), c}));
    const auto counts = apportion(p, idx.size());
    std::size_t pos = 0;
    for (std::size_t j = 0; j < agents; ++j) {
      out.shards[j].insert(out.shards[j].end(), idx.begin() + static_cast<std::ptrdiff_t>(pos),
                           idx.begin() + static_cast<std::ptrdiff_t>(pos + counts[j]));
      pos += counts[j];
    }
  }
  for (auto& s : out.shards) std::sort(s.begin(), s.end());

  for (std::size_t j = 0; j < agents; ++j) {
    while (out.shards[j].empty()) {
      auto largest = std::max_element(out.shards.begin(), out.shards.end(),
                                      [](const auto& a, const auto& b) { return a.size() < b.size(); });
      out.shards[j].push_back(largest->back());
      largest->pop_back();
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::span<const std::size_t> shard,
                                                    std::size_t batch_size, std::uint64_t epoch,
                                                    std::uint64_t agent_seed) {
  if (batch_size == 0) throw std::invalid_argument("epoch_batches: batch_size must be positive");
  if (shard.empty()) throw std::invalid_argument("epoch_batches: empty shard");
  std::vector<std::size_t> order(shard.begin(), shard.end());
  Engine rng = make_engine({agent_seed, epoch, tag(Stream::batches)});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t pos = 0; pos < order.size(); pos += batch_size) {
    const std::size_t end = std::min(order.size(), pos + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<std::vector<std::size_t>> class_counts(const Partition& partition,
                                                   std::span<const int> labels, int num_classes) {
  std::vector<std::vector<std::size_t>> counts(partition.agents(),
                                               std::vector<std::size_t>(static_cast<std::size_t>(num_classes), 0));
  for (std::size_t a = 0; a < partition.agents(); ++a) {
    for (auto i : partition.shards[a]) ++counts[a][static_cast<std::size_t>(labels[i])];
  }
  return counts;
}

}  // namespace dsgd
