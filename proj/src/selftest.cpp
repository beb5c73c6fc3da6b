#include "psc/selftest.hpp"

#include <cmath>
#include <exception>
#include <ostream>
#include <string>
#include <vector>

#include "psc/codec.hpp"
#include "psc/error.hpp"
#include "psc/prior_config.hpp"
#include "psc/range_coder.hpp"
#include "psc/rng.hpp"

namespace psc {
namespace {

struct CheckFailed {
  std::string detail;
};

void expect(bool ok, const std::string& detail) {
  if (!ok) throw CheckFailed{detail};
}

std::string hex2(unsigned v) {
  static const char* digits = "0123456789ABCDEF";
  return std::string("0x") + digits[(v >> 4) & 0xF] + digits[v & 0xF];
}

void check_e4m3_table(const SelftestHooks& hooks) {
  struct Row {
    double value;
    std::uint8_t bits;
  };
  const Row rows[] = {
      {1.0, 0x38},    {0.25, 0x28},   {-1.5, 0xBC},          {448.0, 0x7E},
      {1.0625, 0x38}, {1.1875, 0x3A}, {std::ldexp(1.0, -9), 0x01}, {1e6, 0x7E},
      {-1e6, 0xFE},   {0.0, 0x00},    {std::ldexp(1.0, -10), 0x00},
  };
  for (const Row& row : rows) {
    const F8Code got = hooks.quantize(row.value);
    expect(got.bits == row.bits, "quantize(" + std::to_string(row.value) + ") = " +
                                     hex2(got.bits) + ", want " + hex2(row.bits));
  }
  expect(dequantize_e4m3(F8Code{0x01}) == std::ldexp(1.0, -9), "0x01 != 2^-9");
  expect(dequantize_e4m3(F8Code{0x7E}) == 448.0, "0x7E != 448");
}

void check_e4m3_idempotence(const SelftestHooks& hooks) {
  int valid = 0;
  for (unsigned b = 0; b < 256; ++b) {
    const F8Code code{static_cast<std::uint8_t>(b)};
    if (!is_valid(code)) continue;
    ++valid;
    const F8Code again = hooks.quantize(dequantize_e4m3(code));
    expect(again == code, "code " + hex2(b) + " maps to " + hex2(again.bits));
  }
  expect(valid == 254, "expected 254 valid codes, found " + std::to_string(valid));
}

void check_range_coder() {
  RngStream stream = derive_stream(0, Domain::kInit, 0xFFFF, 0);
  std::vector<std::uint8_t> symbols(4096);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    // Skewed source so the adaptive model has something to learn.
    const double u = stream.uniform();
    symbols[i] = static_cast<std::uint8_t>(u < 0.7 ? 0x38 : stream.next_u64() & 0xFF);
  }
  const std::vector<std::uint8_t> payload = range_encode(symbols);
  expect(range_decode(payload, symbols.size()) == symbols, "round trip differs");
  const std::vector<std::uint8_t> half = range_decode(payload, symbols.size() / 2);
  expect(std::equal(half.begin(), half.end(), symbols.begin()), "prefix decode differs");
  expect(payload.size() < symbols.size(), "skewed stream did not compress");
}

PriorModel small_gmm() {
  return parse_prior_config(
      "type = gmm\n"
      "dim = 16\n"
      "[component]\nweight = 0.5\nmean = fill 0.5\ncov = ladder 1.0 0.7\nrotation = 11\n"
      "[component]\nweight = 0.5\nmean = fill -0.5\ncov = ladder 1.0 0.6\nrotation = 12\n");
}

PscConfig small_config(std::uint64_t seed) {
  PscConfig cfg;
  cfg.shape = {16};
  cfg.iterations = 4;
  cfg.rows_per_iteration = 2;
  cfg.steps = 10;
  cfg.seed = seed;
  return cfg;
}

void check_synchrony() {
  const PriorModel prior = small_gmm();
  for (std::uint32_t trial = 0; trial < 3; ++trial) {
    RngStream stream = derive_stream(trial, Domain::kInit, 0, 0);
    const Vector x = prior_sample(prior, stream);
    const EncodeResult enc = psc_encode(x, prior, small_config(trial));
    const Bitstream parsed = Bitstream::parse(enc.bitstream.serialize());
    const DecodeResult dec = psc_decode(parsed, prior);
    expect(dec.transform_hash == enc.transform_hash,
           "trial " + std::to_string(trial) + " transform hash differs");
  }
}

void check_tamper() {
  const PriorModel prior = small_gmm();
  RngStream stream = derive_stream(7, Domain::kInit, 0, 0);
  const Vector x = prior_sample(prior, stream);
  const EncodeResult enc = psc_encode(x, prior, small_config(7));
  std::vector<std::uint8_t> bytes = enc.bitstream.serialize();
  bytes.back() ^= 0x01;
  bool rejected = false;
  try {
    psc_decode(Bitstream::parse(bytes), prior);
  } catch (const PscError&) {
    rejected = true;
  }
  expect(rejected, "flipped payload bit was not detected");
}

}  // namespace

bool run_selftest(std::ostream& out, const SelftestHooks& hooks) {
  struct Check {
    const char* name;
    std::function<void()> run;
  };
  const Check checks[] = {
      {"e4m3 value table", [&] { check_e4m3_table(hooks); }},
      {"e4m3 exhaustive idempotence", [&] { check_e4m3_idempotence(hooks); }},
      {"range coder round trip", check_range_coder},
      {"transform synchrony", check_synchrony},
      {"tamper detection", check_tamper},
  };
  bool all = true;
  for (const Check& check : checks) {
    try {
      check.run();
      out << "PASS " << check.name << '\n';
    } catch (const CheckFailed& f) {
      all = false;
      out << "FAIL " << check.name << ": " << f.detail << '\n';
    } catch (const std::exception& e) {
      all = false;
      out << "FAIL " << check.name << ": " << e.what() << '\n';
    }
  }
  return all;
}

}  // namespace psc
