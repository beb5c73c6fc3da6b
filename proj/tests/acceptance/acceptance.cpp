// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all
// pass. Tolerances are fixed here and are not tuned per run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "psc/codec.hpp"
#include "psc/evaluation.hpp"
#include "psc/prior_config.hpp"
#include "psc/range_coder.hpp"

using namespace psc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PriorModel fixture(const char* name) {
  return load_prior_config(std::string(PSC_FIXTURE_DIR) + "/" + name);
}

Vector draw(const PriorModel& prior, std::uint64_t seed, std::uint32_t index) {
  RngStream s = derive_stream(seed, Domain::kInit, 0, index);
  return prior_sample(prior, s);
}

PscConfig codec_config(std::size_t d, std::size_t n, std::size_t r, std::uint64_t seed) {
  PscConfig cfg;
  cfg.shape = {static_cast<std::uint32_t>(d)};
  cfg.iterations = n;
  cfg.rows_per_iteration = r;
  cfg.seed = seed;
  return cfg;
}

// 1. Encoder and decoder rebuild the same transform.
Outcome transform_synchrony() {
  const PriorModel prior = fixture("gmm64.prior");
  // Single worker so the runtime bound refers to one core.
  ::setenv("PSC_THREADS", "1", 1);
  const auto start = std::chrono::steady_clock::now();
  int matches = 0;
  for (std::uint32_t trial = 0; trial < 100; ++trial) {
    const PscConfig cfg = codec_config(64, 8, 4, trial);
    const EncodeResult enc = psc_encode(draw(prior, 1, trial), prior, cfg);
    const Bitstream wire = Bitstream::parse(enc.bitstream.serialize());
    const DecodeResult dec = psc_decode(wire, prior);
    if (dec.transform_hash == enc.transform_hash) ++matches;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ::unsetenv("PSC_THREADS");
  return {matches == 100 && seconds <= 300.0,
          fmt("%d/100 hashes match, %.1f s on one core (limit 300 s)", matches, seconds)};
}

// 2. Exact-covariance selection is the KLT on a Gaussian prior.
Outcome klt_equivalence() {
  const PriorModel prior = fixture("gaussian16.prior");
  const auto& g = std::get<GaussianPrior>(prior);
  const EigenDecomposition eig = sym_eig_desc(g.covariance());
  PscConfig cfg = codec_config(16, 16, 1, 0);
  cfg.selection = SelectionMode::kExactCovariance;
  cfg.quantizer = QuantizerId::kRaw64;

  const EncodeResult reference = psc_encode(draw(prior, 2, 0), prior, cfg);
  double worst_dot = 1.0;
  for (std::size_t i = 0; i < 16; ++i)
    worst_dot = std::min(worst_dot, std::abs(dot(reference.transform.row(i), eig.vectors.row(i))));
  bool pass = worst_dot >= 0.999;
  std::string detail = fmt("min |dot| with eigenvectors %.6f (need >= 0.999)", worst_dot);

  const std::size_t ks[] = {1, 2, 4, 8};
  std::vector<double> totals(4, 0.0);
  const int draws = 1000;
  for (int t = 0; t < draws; ++t) {
    const Vector x = draw(prior, 2, static_cast<std::uint32_t>(t));
    const EncodeResult enc = psc_encode(x, prior, cfg);
    for (std::size_t j = 0; j < 4; ++j) {
      const MeasurementRecord rec = enc.record.prefix(ks[j]);
      totals[j] += squared_error(x, restore_pinv(enc.transform.prefix(ks[j]), rec.dequantized()));
    }
  }
  for (std::size_t j = 0; j < 4; ++j) {
    double tail = 0.0;
    for (std::size_t i = ks[j]; i < 16; ++i) tail += eig.values[i];
    const double mse = totals[j] / draws;
    const double rel = std::abs(mse - tail) / tail;
    pass = pass && rel <= 0.05;
    detail += fmt("; k=%zu mse %.5f vs tail %.5f (%.1f%%)", ks[j], mse, tail, 100 * rel);
  }
  return {pass, detail};
}

// 3. Adaptive rows beat the best fixed transform on a two-cluster mixture.
Outcome adaptivity_gain() {
  const PriorModel prior = fixture("gmm32_split.prior");
  const EigenDecomposition mix = sym_eig_desc(prior_covariance(prior));
  const Vector mean = prior_mean(prior);
  // Best fixed 4-row linear code: leaves the trailing mixture eigenvalues
  // plus nothing else, since the mixture mean is zero.
  double fixed = 0.0;
  for (std::size_t i = 4; i < mix.values.size(); ++i) fixed += mix.values[i];
  fixed += dot(mean, mean);

  PscConfig cfg = codec_config(32, 4, 1, 0);
  cfg.sampler = SamplerId::kExactGmm;
  cfg.samples = 64;
  cfg.quantizer = QuantizerId::kRaw64;
  const int draws = 200;
  double total = 0.0;
  for (int t = 0; t < draws; ++t) {
    const Vector x = draw(prior, 3, static_cast<std::uint32_t>(t));
    cfg.seed = static_cast<std::uint64_t>(t);
    const EncodeResult enc = psc_encode(x, prior, cfg);
    total += squared_error(x, restore_pinv(enc.transform, enc.record.dequantized()));
  }
  const double psc = total / draws;
  const double gain = 1.0 - psc / fixed;
  return {gain >= 0.10, fmt("PSC mse %.4f vs fixed KLT %.4f (analytic), gain %.1f%% (need >= 10%%)",
                            psc, fixed, 100 * gain)};
}

struct SamplerError {
  double mean_err = 0.0;  // max abs over coordinates
  double var_err = 0.0;   // max relative (absolute vs trace where the oracle is 0)
  Vector mean, var;
};

SamplerError sampler_error(std::size_t steps) {
  const GaussianPrior g({0.0, 0.0}, Matrix(2, 2, {4, 0, 0, 1}));
  const PriorModel prior = g;
  const OrthonormalRows h(Matrix(1, 2, {1, 0}));
  const Vector y{2.0};
  const SamplerConfig cfg{default_schedule(prior, steps), 1.0, 1.0};
  const std::size_t n = 2000;
  const auto xs = sample_batch(SamplerId::kDdrmNl, prior, h, y, n, cfg, 4, 0);
  const PosteriorMoments oracle = gaussian_posterior_moments(g, h, y);
  SamplerError e;
  e.mean.assign(2, 0.0);
  e.var.assign(2, 0.0);
  for (const auto& x : xs)
    for (std::size_t j = 0; j < 2; ++j) e.mean[j] += x[j] / n;
  for (const auto& x : xs)
    for (std::size_t j = 0; j < 2; ++j) e.var[j] += (x[j] - e.mean[j]) * (x[j] - e.mean[j]) / (n - 1);
  const double trace = oracle.covariance(0, 0) + oracle.covariance(1, 1);
  for (std::size_t j = 0; j < 2; ++j) {
    e.mean_err = std::max(e.mean_err, std::abs(e.mean[j] - oracle.mean[j]));
    const double want = oracle.covariance(j, j);
    const double scale = want > 1e-9 * trace ? want : trace;
    e.var_err = std::max(e.var_err, std::abs(e.var[j] - want) / scale);
  }
  return e;
}

// 4. Sampler moments against the closed-form posterior.
Outcome sampler_correctness() {
  const SamplerError t25 = sampler_error(25);
  const SamplerError t10 = sampler_error(10);
  const SamplerError t50 = sampler_error(50);
  const bool at25 = t25.mean_err <= 0.15 && t25.var_err <= 0.15;
  // Accuracy: the worse of the two errors, each in units of its tolerance.
  const auto score = [](const SamplerError& e) { return std::max(e.mean_err, e.var_err) / 0.15; };
  const bool improving = score(t50) <= score(t10);
  return {at25 && improving,
          fmt("T=25 mean (%.4f, %.4f) var (%.4f, %.4f) vs mean (2, 0) var (0, 1): "
              "mean err %.4f (<= 0.15), var err %.1f%% (<= 15%%); score T=10 %.3f, T=50 %.3f",
              t25.mean[0], t25.mean[1], t25.var[0], t25.var[1], t25.mean_err, 100 * t25.var_err,
              score(t10), score(t50))};
}

// 5. e4m3 code table and exhaustive idempotence.
Outcome quantizer() {
  struct Row {
    double value;
    std::uint8_t bits;
  };
  const Row table[] = {{1.0, 0x38}, {0.25, 0x28}, {-1.5, 0xBC}, {448.0, 0x7E}, {1.0625, 0x38}};
  int table_ok = 0;
  for (const Row& r : table) table_ok += quantize_e4m3(r.value).bits == r.bits;
  const bool sub = dequantize_e4m3(F8Code{0x01}) == std::ldexp(1.0, -9);
  int valid = 0, stable = 0;
  for (unsigned b = 0; b < 256; ++b) {
    const F8Code c{static_cast<std::uint8_t>(b)};
    if (!is_valid(c)) continue;
    ++valid;
    stable += quantize_e4m3(dequantize_e4m3(c)) == c;
  }
  return {table_ok == 5 && sub && valid == 254 && stable == 254,
          fmt("table %d/5, 0x01 -> 2^-9 %s, idempotent %d/%d codes", table_ok, sub ? "yes" : "no",
              stable, valid)};
}

// 6. Range coder.
Outcome entropy_coder() {
  RngStream s = derive_stream(6, Domain::kInit, 0, 0);
  std::vector<std::uint8_t> uniform(100000);
  for (auto& b : uniform) b = static_cast<std::uint8_t>(s.next_u64() >> 56);
  const auto payload = range_encode(uniform);
  const bool round_trip = range_decode(payload, uniform.size()) == uniform;
  const double bits = 8.0 * payload.size() / uniform.size();
  const auto constant = range_encode(std::vector<std::uint8_t>(1000, 0x38));
  const auto half = range_decode(payload, uniform.size() / 2);
  const bool prefix = std::equal(half.begin(), half.end(), uniform.begin());
  return {round_trip && bits <= 8.1 && constant.size() <= 150 && prefix,
          fmt("round trip %s, uniform %.4f bits/symbol (<= 8.1), constant 1000 -> %zu bytes "
              "(<= 150), half prefix %s",
              round_trip ? "ok" : "FAILED", bits, constant.size(), prefix ? "ok" : "FAILED")};
}

// 7. Distortion falls with every prefix and prefixes are bit-exact.
Outcome progressive_decode() {
  const PriorModel prior = fixture("gaussian16.prior");
  const std::size_t r = 2, n = 8;
  const PscConfig cfg = codec_config(16, n, r, 7);
  const int draws = 50;
  std::vector<double> mse(n + 1, 0.0);
  bool exact = true;
  for (int t = 0; t < draws; ++t) {
    const Vector x = draw(prior, 7, static_cast<std::uint32_t>(t));
    const EncodeResult enc = psc_encode(x, prior, cfg);
    const Bitstream wire = Bitstream::parse(enc.bitstream.serialize());
    for (std::size_t it = 0; it <= n; ++it) {
      const DecodeResult dec = psc_decode(wire, prior, {RestorationMode::kPinv, it * r, 1});
      const OrthonormalRows h = enc.transform.prefix(it * r);
      const MeasurementRecord rec = enc.record.prefix(it * r);
      exact = exact && dec.transform == h && dec.record.codes() == rec.codes() &&
              dec.signal == restore_pinv(h, rec.dequantized());
      mse[it] += squared_error(x, dec.signal) / draws;
    }
  }
  bool monotone = true;
  std::string curve;
  for (std::size_t it = 0; it <= n; ++it) {
    if (it > 0 && mse[it] > mse[it - 1] * 1.01) monotone = false;
    curve += fmt("%s%.3g", it ? " " : "", mse[it]);
  }
  return {monotone && exact, fmt("mse by k = 0..16 step 2: [%s]; non-increasing %s, prefixes bit-exact %s",
                                 curve.c_str(), monotone ? "yes" : "no", exact ? "yes" : "no")};
}

// 8. Rank per iteration barely matters at a fixed measurement budget.
Outcome rank_ablation() {
  const PriorModel prior = fixture("gaussian16.prior");
  const int draws = 100;
  std::vector<double> means;
  std::string detail;
  for (std::size_t r : {1, 2, 4}) {
    const PscConfig cfg = codec_config(16, 16 / r, r, 8);
    double total = 0.0;
    for (int t = 0; t < draws; ++t) {
      const Vector x = draw(prior, 8, static_cast<std::uint32_t>(t));
      const EncodeResult enc = psc_encode(x, prior, cfg);
      total += squared_error(x, restore_pinv(enc.transform, enc.record.dequantized()));
    }
    means.push_back(total / draws);
    detail += fmt("r=%zu mse %.4g; ", r, means.back());
  }
  const double ratio = *std::max_element(means.begin(), means.end()) /
                       *std::min_element(means.begin(), means.end());
  return {ratio <= 1.2, detail + fmt("max/min %.3f (<= 1.2)", ratio)};
}

// 9. Full-rank decode with e4m3 quantization.
Outcome full_rank_psnr() {
  const PriorModel prior = fixture("gaussian16.prior");
  const PscConfig cfg = codec_config(16, 4, 4, 9);
  const int draws = 100;
  double sum = 0.0, worst = INFINITY, as_drawn = 0.0;
  for (int t = 0; t < draws; ++t) {
    Vector x = draw(prior, 9, static_cast<std::uint32_t>(t));
    {
      const EncodeResult enc = psc_encode(x, prior, cfg);
      const DecodeResult dec = psc_decode(Bitstream::parse(enc.bitstream.serialize()), prior);
      as_drawn += psnr(1.0, mean_squared_error(x, dec.signal)) / draws;
    }
    // Unit peak: largest magnitude scaled to 1.
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    for (double& v : x) v /= peak;
    const EncodeResult enc = psc_encode(x, prior, cfg);
    const DecodeResult dec = psc_decode(Bitstream::parse(enc.bitstream.serialize()), prior);
    const double p = psnr(1.0, mean_squared_error(x, dec.signal));
    sum += p;
    worst = std::min(worst, p);
  }
  const double mean = sum / draws;
  return {mean >= 40.0,
          fmt("mean PSNR %.2f dB over %d unit-peak signals (>= 40), worst %.2f dB; "
              "unscaled draws at peak 1 give %.2f dB (informational)",
              mean, draws, worst, as_drawn)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"1 transform synchrony", transform_synchrony},
      {"2 KLT equivalence", klt_equivalence},
      {"3 adaptivity gain", adaptivity_gain},
      {"4 sampler vs closed form", sampler_correctness},
      {"5 e4m3 quantizer", quantizer},
      {"6 range coder", entropy_coder},
      {"7 progressive decode", progressive_decode},
      {"8 rank ablation", rank_ablation},
      {"9 full-rank PSNR", full_rank_psnr},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
