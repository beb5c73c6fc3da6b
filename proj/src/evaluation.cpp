#include "psc/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "psc/error.hpp"
#include "psc/prior_config.hpp"
#include "psc/range_coder.hpp"

namespace psc {
namespace {

struct Accumulator {
  std::vector<double> psnr;
  std::vector<double> mse;
  std::vector<double> bpp;
  double seconds = 0.0;

  void add(double peak, double m, double b) {
    mse.push_back(m);
    psnr.push_back(psnr_value(peak, m));
    bpp.push_back(b);
  }
  static double psnr_value(double peak, double m) { return psc::psnr(peak, m); }
};

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  if (!std::isfinite(m)) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

double mean_squared_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::kShapeMismatch, "mse operands differ in length");
  if (a.empty()) return 0.0;
  return squared_error(a, b) / static_cast<double>(a.size());
}

double squared_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::kShapeMismatch, "operands differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

double psnr(double peak, double mse) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

std::string format_psnr(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

OrthonormalRows klt_transform(const PriorModel& prior, std::size_t k) {
  const EigenDecomposition eig = sym_eig_desc(prior_covariance(prior));
  Matrix rows(k, eig.vectors.cols());
  for (std::size_t i = 0; i < k; ++i) {
    const auto src = eig.vectors.row(i);
    std::copy(src.begin(), src.end(), rows.row(i).begin());
  }
  return orthonormalize_against(rows, OrthonormalRows(eig.vectors.cols()));
}

OrthonormalRows random_orthonormal_transform(std::size_t dim, std::size_t k, std::uint64_t seed) {
  const Matrix q = random_orthogonal(dim, seed);
  Matrix rows(k, dim);
  for (std::size_t i = 0; i < k; ++i) {
    const auto src = q.row(i);
    std::copy(src.begin(), src.end(), rows.row(i).begin());
  }
  return OrthonormalRows(std::move(rows));
}

FixedTransformResult run_fixed_transform(const OrthonormalRows& h, std::span<const double> x,
                                         QuantizerId quantizer, double prescale) {
  MeasurementRecord record(quantizer);
  for (std::size_t i = 0; i < h.count(); ++i) record.append(prescale * dot(h.row(i), x));
  FixedTransformResult out;
  out.reconstruction = restore_pinv(h, record.dequantized(), prescale);
  out.payload_bytes = range_encode(record.codes()).size();
  return out;
}

std::vector<SweepRow> run_sweep(const PriorModel& prior, const SweepOptions& options) {
  using Clock = std::chrono::steady_clock;
  const std::size_t d = prior_dim(prior);
  const std::vector<std::uint32_t> shape{static_cast<std::uint32_t>(d)};
  const std::size_t header_bytes = header_size_for(shape.size());
  if (options.trials == 0) fail(ErrorCode::kConfigInvalid, "sweep needs at least one trial");

  std::vector<Vector> signals;
  for (std::size_t t = 0; t < options.trials; ++t) {
    RngStream stream = derive_stream(options.seed, Domain::kInit, 0, static_cast<std::uint32_t>(t));
    signals.push_back(prior_sample(prior, stream));
  }

  std::vector<SweepRow> rows;
  for (double rate : options.rates) {
    for (std::size_t r : options.ranks) {
      if (r == 0 || r > d) fail(ErrorCode::kConfigInvalid, "rank must be in [1, D]");
      const std::size_t n = std::min(iterations_for_rate(rate, shape, r), d / r);
      const std::size_t k = n * r;

      PscConfig cfg;
      cfg.shape = shape;
      cfg.iterations = n;
      cfg.rows_per_iteration = r;
      cfg.samples = options.samples;
      cfg.sampler = options.sampler;
      cfg.selection = options.selection;
      cfg.steps = options.steps;
      cfg.eta = options.eta;
      cfg.eta_b = options.eta_b;
      cfg.seed = options.seed;
      cfg.quantizer = options.quantizer;

      Accumulator pinv, mean, sample, klt, random;
      const OrthonormalRows klt_rows = klt_transform(prior, k);
      const OrthonormalRows random_rows = random_orthonormal_transform(d, k, options.seed ^ 0x5EED);
      for (const Vector& x : signals) {
        auto start = Clock::now();
        const EncodeResult enc = psc_encode(x, prior, cfg);
        const Bitstream parsed = Bitstream::parse(enc.bitstream.serialize());
        const DecodeResult dec = psc_decode(parsed, prior, {RestorationMode::kPinv, std::nullopt, 0});
        const double bpp = measure_bpp(parsed);
        pinv.add(options.peak, mean_squared_error(x, dec.signal), bpp);
        const double shared = std::chrono::duration<double>(Clock::now() - start).count();
        pinv.seconds += shared;

        const RestorationSampler rs{cfg.sampler, make_sampler_config(cfg, prior), cfg.seed,
                                    cfg.prescale};
        start = Clock::now();
        const Vector xm = restore_posterior_mean(dec.transform, dec.record.dequantized(), prior,
                                                 options.average_count, rs);
        mean.seconds += shared + std::chrono::duration<double>(Clock::now() - start).count();
        mean.add(options.peak, mean_squared_error(x, xm), bpp);

        start = Clock::now();
        const Vector xs = restore_posterior_sample(dec.transform, dec.record.dequantized(), prior, rs);
        sample.seconds += shared + std::chrono::duration<double>(Clock::now() - start).count();
        sample.add(options.peak, mean_squared_error(x, xs), bpp);

        for (auto [acc, h] : {std::pair{&klt, &klt_rows}, std::pair{&random, &random_rows}}) {
          start = Clock::now();
          const FixedTransformResult fixed = run_fixed_transform(*h, x, cfg.quantizer, cfg.prescale);
          acc->seconds += std::chrono::duration<double>(Clock::now() - start).count();
          acc->add(options.peak, mean_squared_error(x, fixed.reconstruction),
                   measure_bpp(header_bytes + fixed.payload_bytes, shape));
        }
      }

      const std::pair<const char*, const Accumulator*> modes[] = {
          {"psc-pinv", &pinv}, {"psc-mean", &mean}, {"psc-sample", &sample},
          {"klt", &klt}, {"random", &random}};
      for (const auto& [name, acc] : modes) {
        SweepRow row;
        row.rate_bpp = rate;
        row.rank = r;
        row.mode = name;
        row.mean_psnr = mean_of(acc->psnr);
        row.std_psnr = std_of(acc->psnr);
        row.mean_mse = mean_of(acc->mse);
        row.wall_time = acc->seconds;
        row.measurements = k;
        row.achieved_bpp = mean_of(acc->bpp);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "rate_bpp,r,mode,mean_psnr,std_psnr,mean_mse,wall_time,measurements,achieved_bpp\n";
  char buf[512];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%zu,%s,%s,%.6g,%.9g,%.6f,%zu,%.6g\n", row.rate_bpp,
                  row.rank, row.mode.c_str(), format_psnr(row.mean_psnr).c_str(), row.std_psnr,
                  row.mean_mse, row.wall_time, row.measurements, row.achieved_bpp);
    out << buf;
  }
}

}  // namespace psc
