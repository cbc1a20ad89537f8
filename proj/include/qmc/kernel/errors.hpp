#pragma once

#include <stdexcept>
#include <string>

namespace qmc::kernel {

class KernelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidGridError : public KernelError {
public:
  using KernelError::KernelError;
};

class ShapeMismatchError : public KernelError {
public:
  using KernelError::KernelError;
};

class DataFormatError : public KernelError {
public:
  using KernelError::KernelError;
};

/// Wraps a failure from one cluster of a multi-cluster evaluation.
class ClusterError : public KernelError {
public:
  ClusterError(std::string cluster_id, const std::string& what)
      : KernelError("cluster '" + cluster_id + "': " + what), cluster_id_(std::move(cluster_id)) {}

  const std::string& cluster_id() const { return cluster_id_; }

private:
  std::string cluster_id_;
};

} // namespace qmc::kernel
