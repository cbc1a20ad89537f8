#pragma once

#include <qmc/compute/backend_model.hpp>
#include <qmc/compute/records.hpp>
#include <qmc/kernel/abel.hpp>
#include <qmc/queue/queue.hpp>
#include <qmc/store/object_store.hpp>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace qmc::compute {

enum class BackendKind { simulated, local, remote };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend(std::string_view name); // "sim" | "local" | "remote"

struct BackendConfig {
  BackendKind kind = BackendKind::simulated;
  std::size_t pool_size = 4;   // local workers or remote connections
  std::string remote_addr;     // host:port, remote only
  std::uint64_t seed = 0;      // jitter stream of the simulated backend
  int n_quad = kernel::default_n_quad;
};

/// Consumes requests from an input queue through a trigger and publishes one
/// response (or one ERR control message) per request on the output queue.
/// Responses keep the request's msg_id.
class ComputePlane {
public:
  virtual ~ComputePlane() = default;

  virtual BackendKind kind() const = 0;
  virtual std::vector<InvocationRecord> records() const = 0;
  virtual void shutdown() = 0;
};

/// The simulated backend requires the fabric to run on a VirtualClock; it
/// advances that clock when the output queue is polled dry.
std::unique_ptr<ComputePlane> attach_backend(queue::QueueFabric& fabric,
                                             const queue::QueueHandle& input_q,
                                             const queue::QueueHandle& output_q,
                                             const BackendConfig& config,
                                             const BackendModel& model,
                                             std::shared_ptr<const store::ObjectStore> store);

} // namespace qmc::compute
