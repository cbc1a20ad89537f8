#pragma once

#include <qmc/mcmc/coordinator.hpp>

#include <ostream>

namespace qmc::mcmc {

/// Header `walker,iteration,accepted,log_post,param_0,...`; values printed
/// with round-trip precision so identical runs produce identical bytes.
void write_chain_csv(std::ostream& os, const ChainOutput& out);

/// Header `walker,iteration,dispatch_ts,complete_ts`.
void write_timeline_csv(std::ostream& os, const ChainOutput& out);

std::string format_double(double v);

} // namespace qmc::mcmc
