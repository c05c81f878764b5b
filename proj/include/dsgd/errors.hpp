#pragma once

#include <stdexcept>
#include <string>

namespace dsgd {

/// Operand lengths or matrix shapes disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A round was driven out of order, e.g. gossip without a neighbor snapshot.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Requested partition cannot be satisfied (more agents than samples).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dsgd
