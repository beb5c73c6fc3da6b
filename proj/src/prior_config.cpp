#include "psc/prior_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psc/error.hpp"

namespace psc {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

[[noreturn]] void bad(int line, const std::string& what) {
  fail(ErrorCode::kConfigInvalid, "prior config line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& tok, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    bad(line, "not a finite number: '" + tok + "'");
  return v;
}

std::uint64_t to_u64(const std::string& tok, int line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    bad(line, "not an unsigned integer: '" + tok + "'");
  return v;
}

// Numbers with "n*v" repetition, e.g. "4 3 24*0.01".
std::vector<double> expand_list(const std::vector<std::string>& toks, std::size_t first,
                                int line) {
  std::vector<double> out;
  for (std::size_t i = first; i < toks.size(); ++i) {
    const auto star = toks[i].find('*');
    if (star == std::string::npos) {
      out.push_back(to_double(toks[i], line));
    } else {
      const std::uint64_t n = to_u64(toks[i].substr(0, star), line);
      const double v = to_double(toks[i].substr(star + 1), line);
      out.insert(out.end(), n, v);
    }
  }
  return out;
}

struct ComponentSpec {
  int line = 0;
  std::optional<double> weight;
  std::vector<std::string> mean{"zeros"};
  std::vector<std::string> cov{"identity"};
  int mean_line = 0;
  int cov_line = 0;
  std::optional<std::uint64_t> rotation;
};

Vector build_mean(const ComponentSpec& c, std::size_t d) {
  const auto& t = c.mean;
  const int line = c.mean_line;
  if (t.empty()) bad(line, "empty mean");
  if (t[0] == "zeros") return Vector(d, 0.0);
  if (t[0] == "fill") {
    if (t.size() != 2) bad(line, "mean = fill <value>");
    return Vector(d, to_double(t[1], line));
  }
  if (t[0] == "sparse") {
    Vector m(d, 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) {
      const auto colon = t[i].find(':');
      if (colon == std::string::npos) bad(line, "sparse entries are index:value");
      const std::uint64_t idx = to_u64(t[i].substr(0, colon), line);
      if (idx >= d) bad(line, "sparse index out of range");
      m[idx] = to_double(t[i].substr(colon + 1), line);
    }
    return m;
  }
  const std::size_t first = t[0] == "values" ? 1 : 0;
  Vector m = expand_list(t, first, line);
  if (m.size() != d) bad(line, "mean has " + std::to_string(m.size()) + " entries, need " +
                                   std::to_string(d));
  return m;
}

Matrix build_cov(const ComponentSpec& c, std::size_t d) {
  const auto& t = c.cov;
  const int line = c.cov_line;
  if (t.empty()) bad(line, "empty covariance");
  const std::string& kind = t[0];
  Matrix cov(d, d);
  if (kind == "identity") {
    const double s = t.size() > 1 ? to_double(t[1], line) : 1.0;
    for (std::size_t i = 0; i < d; ++i) cov(i, i) = s;
  } else if (kind == "diag") {
    const Vector v = expand_list(t, 1, line);
    if (v.size() != d) bad(line, "diag has " + std::to_string(v.size()) + " entries, need " +
                                     std::to_string(d));
    for (std::size_t i = 0; i < d; ++i) cov(i, i) = v[i];
  } else if (kind == "ladder") {
    if (t.size() != 3) bad(line, "cov = ladder <top> <ratio>");
    const double top = to_double(t[1], line);
    const double ratio = to_double(t[2], line);
    double lambda = top;
    for (std::size_t i = 0; i < d; ++i, lambda *= ratio) cov(i, i) = lambda;
  } else if (kind == "random_psd") {
    if (t.size() < 2 || t.size() > 3) bad(line, "cov = random_psd <seed> [scale]");
    const std::uint64_t seed = to_u64(t[1], line);
    const double s = t.size() == 3 ? to_double(t[2], line) : 1.0;
    RngStream stream = derive_stream(seed, Domain::kInit, 2, 0);
    Matrix b(d, d, stream.gauss(d * d));
    cov = multiply_abt(b, b);
    for (double& v : cov.data()) v *= s / static_cast<double>(d);
  } else if (kind == "full") {
    const Vector v = expand_list(t, 1, line);
    if (v.size() != d * d) bad(line, "full covariance needs D*D entries");
    cov = Matrix(d, d, v);
  } else {
    bad(line, "unknown covariance kind '" + kind + "'");
  }
  if (c.rotation) {
    const Matrix q = random_orthogonal(d, *c.rotation);
    // Rows of q become the eigenbasis: Sigma' = Q^T Sigma Q.
    cov = multiply(multiply(q.transposed(), cov), q);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) cov(i, j) = cov(j, i) = 0.5 * (cov(i, j) + cov(j, i));
  }
  return cov;
}

}  // namespace

Matrix random_orthogonal(std::size_t dim, std::uint64_t seed) {
  RngStream stream = derive_stream(seed, Domain::kInit, 1, 0);
  const Matrix raw(dim, dim, stream.gauss(dim * dim));
  return orthonormalize_against(raw, OrthonormalRows(dim)).matrix();
}

PriorModel parse_prior_config(std::string_view text) {
  std::string type;
  std::optional<std::size_t> dim;
  ComponentSpec top;
  std::vector<ComponentSpec> components;
  ComponentSpec* current = &top;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s == "[component]") {
      components.emplace_back();
      components.back().line = line;
      current = &components.back();
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) bad(line, "expected key = value");
    const std::string key{trim(s.substr(0, eq))};
    const std::vector<std::string> value = split_ws(s.substr(eq + 1));
    if (value.empty()) bad(line, "missing value for '" + key + "'");

    if (key == "type") {
      if (current != &top) bad(line, "type belongs before any [component]");
      type = value[0];
    } else if (key == "dim") {
      if (current != &top) bad(line, "dim belongs before any [component]");
      dim = to_u64(value[0], line);
    } else if (key == "weight") {
      current->weight = to_double(value[0], line);
    } else if (key == "mean") {
      current->mean = value;
      current->mean_line = line;
    } else if (key == "cov") {
      current->cov = value;
      current->cov_line = line;
    } else if (key == "rotation") {
      current->rotation = to_u64(value[0], line);
    } else {
      bad(line, "unknown key '" + key + "'");
    }
  }

  if (!dim || *dim == 0) fail(ErrorCode::kConfigInvalid, "prior config needs dim > 0");
  if (!components.empty() && (top.mean_line || top.cov_line || top.rotation || top.weight))
    fail(ErrorCode::kConfigInvalid, "component keys before the first [component]");
  const std::size_t d = *dim;
  if (type == "gaussian") {
    // Parameters go either at top level or in a single [component].
    if (components.size() > 1)
      fail(ErrorCode::kConfigInvalid, "gaussian prior takes at most one [component]");
    const ComponentSpec& c = components.empty() ? top : components.front();
    if (c.weight) fail(ErrorCode::kConfigInvalid, "gaussian prior takes no weight");
    return GaussianPrior(build_mean(c, d), build_cov(c, d));
  }
  if (type == "gmm") {
    if (components.empty()) fail(ErrorCode::kConfigInvalid, "gmm prior needs [component] sections");
    std::vector<double> weights;
    std::vector<GaussianPrior> parts;
    for (const auto& c : components) {
      weights.push_back(c.weight.value_or(1.0 / static_cast<double>(components.size())));
      parts.emplace_back(build_mean(c, d), build_cov(c, d));
    }
    return GmmPrior(std::move(weights), std::move(parts));
  }
  fail(ErrorCode::kConfigInvalid, "type must be gaussian or gmm, got '" + type + "'");
}

PriorModel load_prior_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read prior config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_prior_config(text.str());
}

}  // namespace psc
