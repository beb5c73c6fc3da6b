#include "psc/bitstream.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "psc/error.hpp"
#include "psc/hash.hpp"

namespace psc {
namespace {

constexpr unsigned char kMagic[4] = {'P', 'S', 'C', '1'};
constexpr std::size_t kMaxDims = 4;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { need(1); return in_[pos_++]; }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > in_.size()) fail(ErrorCode::kCorruptStream, "bitstream header truncated");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_header_fields(Writer& w, const BitstreamHeader& h, std::span<const std::uint8_t> payload) {
  w.raw(kMagic);
  w.u8(kBitstreamVersion);
  w.u8(static_cast<std::uint8_t>(h.shape.size()));
  for (std::uint32_t d : h.shape) w.u32(d);
  w.u32(h.iterations);
  w.u32(h.rows_per_iteration);
  w.u32(h.samples);
  w.u8(h.sampler_id);
  w.u8(h.selection_mode);
  w.f64(h.eta);
  w.f64(h.eta_b);
  w.u32(h.steps);
  w.u64(h.seed);
  w.u8(h.quantizer_id);
  w.u8(h.entropy_id);
  w.f64(h.prescale);
  w.u64(h.prior_digest);
  w.u32(h.payload_symbol_count);
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.u64(fnv1a64(payload));
}

}  // namespace

std::size_t header_size_for(std::size_t ndim) {
  // magic, version, ndim, dims, then the fixed block and two checksums.
  return 4 + 1 + 1 + 4 * ndim + 4 + 4 + 4 + 1 + 1 + 8 + 8 + 4 + 8 + 1 + 1 + 8 + 8 + 4 + 4 + 8 + 8;
}

std::size_t Bitstream::header_size() const { return header_size_for(header.shape.size()); }

std::vector<std::uint8_t> Bitstream::serialize() const {
  if (header.shape.empty() || header.shape.size() > kMaxDims)
    fail(ErrorCode::kConfigInvalid, "shape must have 1 to 4 dimensions");
  Writer w;
  write_header_fields(w, header, payload);
  w.u64(fnv1a64(w.bytes()));
  w.raw(payload);
  return std::move(w.bytes());
}

Bitstream Bitstream::parse(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  for (unsigned char m : kMagic)
    if (r.u8() != m) fail(ErrorCode::kFormat, "not a PSC bitstream (bad magic)");
  const std::uint8_t version = r.u8();
  if (version != kBitstreamVersion)
    fail(ErrorCode::kFormat, "unsupported bitstream version " + std::to_string(version));
  Bitstream b;
  auto& h = b.header;
  const std::uint8_t ndim = r.u8();
  if (ndim == 0 || ndim > kMaxDims) fail(ErrorCode::kCorruptStream, "bad dimension count");
  for (std::uint8_t i = 0; i < ndim; ++i) h.shape.push_back(r.u32());
  h.iterations = r.u32();
  h.rows_per_iteration = r.u32();
  h.samples = r.u32();
  h.sampler_id = r.u8();
  h.selection_mode = r.u8();
  h.eta = r.f64();
  h.eta_b = r.f64();
  h.steps = r.u32();
  h.seed = r.u64();
  h.quantizer_id = r.u8();
  h.entropy_id = r.u8();
  h.prescale = r.f64();
  h.prior_digest = r.u64();
  h.payload_symbol_count = r.u32();
  const std::uint32_t payload_bytes = r.u32();
  const std::uint64_t payload_checksum = r.u64();
  const std::size_t checked = r.pos();
  const std::uint64_t header_checksum = r.u64();
  if (fnv1a64(bytes.first(checked)) != header_checksum)
    fail(ErrorCode::kChecksumMismatch, "header checksum");
  if (bytes.size() - r.pos() != payload_bytes)
    fail(ErrorCode::kCorruptStream, "payload is " + std::to_string(bytes.size() - r.pos()) +
                                        " bytes, header says " + std::to_string(payload_bytes));
  b.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos()), bytes.end());
  if (fnv1a64(b.payload) != payload_checksum)
    fail(ErrorCode::kChecksumMismatch, "payload checksum");
  return b;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "short write to " + path.string());
}

void write_bitstream(const std::filesystem::path& path, const Bitstream& b) {
  write_file_bytes(path, b.serialize());
}

Bitstream read_bitstream(const std::filesystem::path& path) {
  return Bitstream::parse(read_file_bytes(path));
}

}  // namespace psc
