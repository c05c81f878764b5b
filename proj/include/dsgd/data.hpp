#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dsgd {

/// Row-major feature matrix with one integer label per row.
struct Samples {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const noexcept { return {features.data() + i * dim, dim}; }
  void push_back(std::span<const double> x, int label);
};

struct Dataset {
  int num_classes = 0;
  Samples train;
  Samples validation;
  Samples test;
};

/// C Gaussian clusters. Class means are standard normal vectors; each sample
/// is its class mean plus spread * N(0, I). Features are then standardized
/// per column over all generated samples. Split 80/10/10 per class.
Dataset generate_blobs(int num_classes, std::size_t per_class, std::size_t dim, double spread,
                       std::uint64_t seed);

/// Stratified 80/10/10 split after a seeded per-class shuffle. Validation and
/// test each get floor(10%) of a class; train keeps the rest, so every class
/// with at least one sample appears in train.
Dataset split_stratified(const Samples& all, int num_classes, std::uint64_t seed);

/// CSV with a header row, decimal feature columns and an integer label in the
/// last column.
Samples load_csv(const std::string& path);
Samples parse_csv(const std::string& text);

/// Disjoint index sets covering the training split, one per agent.
struct Partition {
  std::vector<std::vector<std::size_t>> shards;

  std::size_t agents() const noexcept { return shards.size(); }
};

/// One Dirichlet(alpha * 1_n) draw. Works in log space so tiny alpha does
/// not underflow every component to zero.
std::vector<double> sample_dirichlet(double alpha, std::size_t n, std::uint64_t seed);

/// Largest-remainder rounding of proportions * total; ties go to the lower
/// index. Counts sum to total exactly.
std::vector<std::size_t> apportion(std::span<const double> proportions, std::size_t total);

/// Per-class Dirichlet label skew. For each class (ascending), its shuffled
/// samples are cut into contiguous blocks sized by apportion(p_c). Afterwards,
/// while a shard is empty, its owner takes one sample from the largest shard.
/// Shards are returned sorted.
Partition dirichlet_partition(std::span<const int> labels, std::size_t agents, double alpha,
                              std::uint64_t seed);

/// Per-epoch shuffle of a shard keyed by (agent_seed, epoch), cut into
/// batches; the short tail batch is kept.
std::vector<std::vector<std::size_t>> epoch_batches(std::span<const std::size_t> shard,
                                                    std::size_t batch_size, std::uint64_t epoch,
                                                    std::uint64_t agent_seed);

/// Per-agent class histogram of a partition.
std::vector<std::vector<std::size_t>> class_counts(const Partition& partition,
                                                   std::span<const int> labels, int num_classes);

}  // namespace dsgd
