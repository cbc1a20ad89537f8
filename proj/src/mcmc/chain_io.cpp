#include <qmc/mcmc/chain_io.hpp>

#include <fmt/format.h>

namespace qmc::mcmc {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_chain_csv(std::ostream& os, const ChainOutput& out) {
  os << "walker,iteration,accepted,log_post";
  for (std::size_t d = 0; d < out.dim; ++d)
    os << ",param_" << d;
  os << '\n';
  for (std::size_t w = 0; w < out.n_walkers; ++w) {
    for (std::size_t it = 0; it < out.completed_iterations; ++it) {
      os << w << ',' << it << ',' << int(out.accepted[w * out.n_iterations + it]) << ','
         << format_double(out.log_post(w, it));
      for (std::size_t d = 0; d < out.dim; ++d)
        os << ',' << format_double(out.sample(w, it, d));
      os << '\n';
    }
  }
}

void write_timeline_csv(std::ostream& os, const ChainOutput& out) {
  os << "walker,iteration,dispatch_ts,complete_ts\n";
  for (const auto& r : out.timeline)
    os << r.walker_id << ',' << r.iteration << ',' << format_double(r.dispatch_ts) << ','
       << format_double(r.complete_ts) << '\n';
}

} // namespace qmc::mcmc
