#pragma once

#include <string>

namespace qmc::compute {

struct InvocationRecord {
  std::string msg_id;
  std::string worker_id;
  double dispatch_ts = 0.0;
  double start_ts = 0.0;
  double end_ts = 0.0;
  bool cold = false;

  friend bool operator==(const InvocationRecord&, const InvocationRecord&) = default;
};

} // namespace qmc::compute
