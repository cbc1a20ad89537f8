#include <qmc/compute/payload.hpp>
#include <qmc/io/bytes.hpp>

namespace qmc::compute {

std::vector<std::uint8_t> encode(const LikelihoodRequest& r) {
  io::ByteWriter w;
  w.reserve(16 + 8 * r.params.size() + r.dataset_key.size());
  w.u32(r.walker_id);
  w.u32(r.iteration);
  w.u32(static_cast<std::uint32_t>(r.params.size()));
  w.f64s(r.params);
  w.string(r.dataset_key);
  return w.take();
}

std::vector<std::uint8_t> encode(const LikelihoodResponse& r) {
  io::ByteWriter w;
  w.u32(r.walker_id);
  w.u32(r.iteration);
  w.f64(r.log_likelihood);
  w.u8(r.cold ? 1 : 0);
  w.f64(r.compute_start_ts);
  w.f64(r.compute_end_ts);
  return w.take();
}

LikelihoodRequest decode_request(std::span<const std::uint8_t> bytes) {
  try {
    io::ByteReader r(bytes);
    LikelihoodRequest out;
    out.walker_id = r.u32();
    out.iteration = r.u32();
    out.params = r.f64s(r.u32());
    out.dataset_key = r.string();
    if (!r.done())
      throw PayloadError("trailing bytes in likelihood request");
    return out;
  } catch (const io::TruncatedInput&) {
    throw PayloadError("truncated likelihood request");
  }
}

LikelihoodResponse decode_response(std::span<const std::uint8_t> bytes) {
  try {
    io::ByteReader r(bytes);
    LikelihoodResponse out;
    out.walker_id = r.u32();
    out.iteration = r.u32();
    out.log_likelihood = r.f64();
    const std::uint8_t cold = r.u8();
    if (cold > 1)
      throw PayloadError("cold flag must be 0 or 1");
    out.cold = cold == 1;
    out.compute_start_ts = r.f64();
    out.compute_end_ts = r.f64();
    if (!r.done())
      throw PayloadError("trailing bytes in likelihood response");
    return out;
  } catch (const io::TruncatedInput&) {
    throw PayloadError("truncated likelihood response");
  }
}

} // namespace qmc::compute
