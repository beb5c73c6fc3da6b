#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psc/codec.hpp"
#include "psc/error.hpp"
#include "psc/evaluation.hpp"
#include "psc/prior_config.hpp"
#include "psc/selftest.hpp"
#include "psc/signal_file.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitEncode = 4;
constexpr int kExitCorrupt = 5;

// Failure with a chosen exit status; keeps the message of the original error.
struct CliFailure {
  int status;
  std::string message;
};

[[noreturn]] void exit_with(int status, const std::string& message) {
  throw CliFailure{status, message};
}

std::string hash_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

psc::PriorModel load_prior(const std::string& path) {
  try {
    return psc::load_prior_config(path);
  } catch (const psc::PscError& e) {
    exit_with(kExitConfig, e.what());
  }
}

psc::SignalFile load_signal(const std::string& path) {
  try {
    return psc::read_signal(path);
  } catch (const psc::PscError& e) {
    exit_with(kExitBadInput, e.what());
  }
}

template <class Parse>
auto parse_enum(Parse parse, const std::string& name) {
  try {
    return parse(name);
  } catch (const psc::PscError& e) {
    exit_with(kExitConfig, e.what());
  }
}

std::vector<std::uint32_t> parse_shape(const std::string& text) {
  std::vector<std::uint32_t> shape;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      const unsigned long v = std::stoul(part);
      if (v == 0 || v > 0xFFFFFFFFul) throw std::out_of_range(part);
      shape.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      exit_with(kExitConfig, "bad shape entry '" + part + "'");
    }
  }
  if (shape.empty()) exit_with(kExitConfig, "empty shape");
  return shape;
}

struct EncodeArgs {
  std::string input, prior, output;
  std::optional<double> bpp;
  std::optional<std::size_t> iters;
  std::size_t rank = psc::kDefaultRowsPerIteration;
  std::size_t samples = 0;
  std::string sampler = "ddrm";
  std::string selection = "sample-pca";
  std::size_t steps = psc::kDefaultSteps;
  double eta = 1.0;
  double eta_b = 1.0;
  std::uint64_t seed = 0;
  std::string quantizer = "e4m3";
  double prescale = 1.0;
};

int cmd_encode(const EncodeArgs& a) {
  if (a.bpp.has_value() == a.iters.has_value())
    exit_with(kExitConfig, "exactly one of --bpp and --iters is required");
  const psc::PriorModel prior = load_prior(a.prior);
  const psc::SignalFile signal = load_signal(a.input);
  if (signal.size() != psc::prior_dim(prior))
    exit_with(kExitBadInput, "signal has " + std::to_string(signal.size()) +
                                 " values but the prior has dimension " +
                                 std::to_string(psc::prior_dim(prior)));

  psc::PscConfig cfg;
  cfg.shape = signal.shape;
  cfg.rows_per_iteration = a.rank;
  cfg.samples = a.samples;
  cfg.sampler = parse_enum(psc::parse_sampler_name, a.sampler);
  cfg.selection = parse_enum(psc::parse_selection_mode, a.selection);
  cfg.steps = a.steps;
  cfg.eta = a.eta;
  cfg.eta_b = a.eta_b;
  cfg.seed = a.seed;
  cfg.quantizer = parse_enum(psc::parse_quantizer_name, a.quantizer);
  cfg.prescale = a.prescale;
  if (a.rank == 0) exit_with(kExitConfig, "--rank must be positive");
  cfg.iterations = a.iters ? *a.iters : psc::iterations_for_rate(*a.bpp, cfg.shape, a.rank);
  try {
    psc::validate(cfg, prior);
  } catch (const psc::PscError& e) {
    exit_with(kExitConfig, e.what());
  }

  psc::EncodeResult enc = [&] {
    try {
      return psc::psc_encode(signal.values(), prior, cfg);
    } catch (const psc::PscError& e) {
      exit_with(kExitEncode, e.what());
    }
  }();
  try {
    psc::write_bitstream(a.output, enc.bitstream);
  } catch (const psc::PscError& e) {
    exit_with(kExitEncode, e.what());
  }
  std::printf("measurements %zu\n", enc.record.size());
  std::printf("bpp %.6f\n", psc::measure_bpp(enc.bitstream));
  std::printf("H hash %s\n", hash_hex(enc.transform_hash).c_str());
  return kExitOk;
}

struct DecodeArgs {
  std::string input, prior, output;
  std::string mode = "pinv";
  std::optional<std::size_t> prefix;
  std::size_t n_avg = psc::kDefaultAverageCount;
  double peak = 1.0;
};

int cmd_decode(const DecodeArgs& a) {
  const psc::PriorModel prior = load_prior(a.prior);
  psc::DecodeOptions options;
  options.mode = parse_enum(psc::parse_restoration_mode, a.mode);
  options.prefix = a.prefix;
  options.average_count = a.n_avg;

  psc::Bitstream b;
  psc::DecodeResult dec = [&] {
    try {
      b = psc::read_bitstream(a.input);
      return psc::psc_decode(b, prior, options);
    } catch (const psc::PscError& e) {
      if (e.code() == psc::ErrorCode::kPriorMismatch || e.code() == psc::ErrorCode::kConfigInvalid)
        exit_with(kExitConfig, e.what());
      exit_with(kExitCorrupt, e.what());
    }
  }();
  psc::SignalFile out =
      psc::SignalFile::from_values(b.header.shape, dec.signal, static_cast<float>(a.peak));
  try {
    psc::write_signal(a.output, out);
  } catch (const psc::PscError& e) {
    exit_with(kExitBadInput, e.what());
  }
  std::printf("measurements %zu\n", dec.record.size());
  std::printf("H hash %s\n", hash_hex(dec.transform_hash).c_str());
  return kExitOk;
}

int cmd_eval(const std::string& original, const std::string& reconstruction) {
  const psc::SignalFile a = load_signal(original);
  const psc::SignalFile b = load_signal(reconstruction);
  if (a.shape != b.shape) exit_with(kExitBadInput, "ShapeMismatch: signals differ in shape");
  const double mse = psc::mean_squared_error(a.values(), b.values());
  std::printf("mse %.9g\n", mse);
  std::printf("psnr %s\n", psc::format_psnr(psc::psnr(a.peak, mse)).c_str());
  return kExitOk;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::stringstream item(part);
    T v{};
    if (!(item >> v) || !item.eof()) exit_with(kExitConfig, std::string("bad ") + what + " '" + part + "'");
    out.push_back(v);
  }
  if (out.empty()) exit_with(kExitConfig, std::string("empty ") + what + " list");
  return out;
}

struct SweepArgs {
  std::string prior, output;
  std::size_t trials = 1;
  std::string rates = "0.5";
  std::string ranks = "4";
  std::uint64_t seed = 0;
  std::string sampler = "ddrm";
  std::string selection = "sample-pca";
  std::string quantizer = "e4m3";
  std::size_t steps = psc::kDefaultSteps;
  std::size_t samples = 0;
  std::size_t n_avg = psc::kDefaultAverageCount;
};

int cmd_sweep(const SweepArgs& a) {
  const psc::PriorModel prior = load_prior(a.prior);
  psc::SweepOptions options;
  options.rates = parse_list<double>(a.rates, "rate");
  options.ranks = parse_list<std::size_t>(a.ranks, "rank");
  options.trials = a.trials;
  options.seed = a.seed;
  options.sampler = parse_enum(psc::parse_sampler_name, a.sampler);
  options.selection = parse_enum(psc::parse_selection_mode, a.selection);
  options.quantizer = parse_enum(psc::parse_quantizer_name, a.quantizer);
  options.steps = a.steps;
  options.samples = a.samples;
  options.average_count = a.n_avg;
  std::vector<psc::SweepRow> rows;
  try {
    rows = psc::run_sweep(prior, options);
  } catch (const psc::PscError& e) {
    exit_with(kExitConfig, e.what());
  }
  std::ofstream out(a.output, std::ios::binary);
  if (!out) exit_with(kExitConfig, "cannot write " + a.output);
  psc::write_sweep_csv(out, rows);
  std::printf("rows %zu\n", rows.size());
  return kExitOk;
}

struct GenArgs {
  std::string prior, output, shape;
  std::uint64_t seed = 0;
  std::uint32_t index = 0;
  double peak = 1.0;
};

int cmd_gen(const GenArgs& a) {
  const psc::PriorModel prior = load_prior(a.prior);
  const std::size_t d = psc::prior_dim(prior);
  std::vector<std::uint32_t> shape =
      a.shape.empty() ? std::vector<std::uint32_t>{static_cast<std::uint32_t>(d)}
                      : parse_shape(a.shape);
  std::size_t total = 1;
  for (auto v : shape) total *= v;
  if (total != d) exit_with(kExitConfig, "shape does not match prior dimension");
  psc::RngStream stream = psc::derive_stream(a.seed, psc::Domain::kInit, 0, a.index);
  const psc::Vector x = psc::prior_sample(prior, stream);
  try {
    psc::write_signal(a.output, psc::SignalFile::from_values(shape, x, static_cast<float>(a.peak)));
  } catch (const psc::PscError& e) {
    exit_with(kExitBadInput, e.what());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Progressive posterior-sampling transform codec"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Encode a signal file");
  encode->add_option("--input,-i", enc.input, "Signal file")->required();
  encode->add_option("--prior,-p", enc.prior, "Prior config")->required();
  encode->add_option("--output,-o", enc.output, "Bitstream path")->required();
  encode->add_option("--bpp", enc.bpp, "Target bits per position, before entropy coding");
  encode->add_option("--iters,-n", enc.iters, "Iteration count N");
  encode->add_option("--rank,-r", enc.rank, "Rows per iteration");
  encode->add_option("--samples,-s", enc.samples, "Posterior samples per iteration (0 = default)");
  encode->add_option("--sampler", enc.sampler, "ddrm | exact-gaussian | exact-gmm");
  encode->add_option("--selection", enc.selection, "sample-pca | exact-cov");
  encode->add_option("--steps", enc.steps, "Sampler steps");
  encode->add_option("--eta", enc.eta);
  encode->add_option("--eta-b", enc.eta_b);
  encode->add_option("--seed", enc.seed);
  encode->add_option("--quantizer", enc.quantizer, "e4m3 | raw64");
  encode->add_option("--prescale", enc.prescale);

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "Decode a bitstream");
  decode->add_option("--input,-i", dec.input, "Bitstream path")->required();
  decode->add_option("--prior,-p", dec.prior, "Prior config")->required();
  decode->add_option("--output,-o", dec.output, "Signal file")->required();
  decode->add_option("--mode", dec.mode, "pinv | mean | sample");
  decode->add_option("--prefix", dec.prefix, "Decode only the first k measurements");
  decode->add_option("--n-avg", dec.n_avg, "Draws averaged by --mode mean");
  decode->add_option("--peak", dec.peak, "Peak value stored in the output file");

  std::string original, reconstruction;
  auto* eval = app.add_subcommand("eval", "PSNR between two signal files");
  eval->add_option("original", original)->required();
  eval->add_option("reconstruction", reconstruction)->required();

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Rate-distortion sweep to CSV");
  sweep->add_option("--prior,-p", sw.prior)->required();
  sweep->add_option("--output,-o", sw.output)->required();
  sweep->add_option("--trials", sw.trials);
  sweep->add_option("--rates", sw.rates, "Comma-separated bpp list");
  sweep->add_option("--ranks", sw.ranks, "Comma-separated r list");
  sweep->add_option("--seed", sw.seed);
  sweep->add_option("--sampler", sw.sampler);
  sweep->add_option("--selection", sw.selection);
  sweep->add_option("--quantizer", sw.quantizer);
  sweep->add_option("--steps", sw.steps);
  sweep->add_option("--samples", sw.samples);
  sweep->add_option("--n-avg", sw.n_avg);

  auto* selftest = app.add_subcommand("selftest", "Run the embedded invariant checks");

  GenArgs gen;
  auto* generate = app.add_subcommand("gen", "Draw a signal from a prior");
  generate->add_option("--prior,-p", gen.prior)->required();
  generate->add_option("--output,-o", gen.output)->required();
  generate->add_option("--shape", gen.shape, "Comma-separated dims (default: D)");
  generate->add_option("--seed", gen.seed);
  generate->add_option("--index", gen.index, "Draw index within the seed");
  generate->add_option("--peak", gen.peak);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (encode->parsed()) return cmd_encode(enc);
    if (decode->parsed()) return cmd_decode(dec);
    if (eval->parsed()) return cmd_eval(original, reconstruction);
    if (sweep->parsed()) return cmd_sweep(sw);
    if (generate->parsed()) return cmd_gen(gen);
    if (selftest->parsed()) return psc::run_selftest(std::cout) ? kExitOk : 1;
  } catch (const CliFailure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.status;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
