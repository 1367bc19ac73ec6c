#include "wallcross/report.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wallcross::report {

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  return buf;
}

// ---- compact SHA-256 ---------------------------------------------------------

namespace {
inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

constexpr std::uint32_t kK[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
} // namespace

std::string sha256_hex(const std::string& bytes) {
  std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                        0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::string msg = bytes;
  const std::uint64_t bitlen = static_cast<std::uint64_t>(msg.size()) * 8;
  msg.push_back('\x80');
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((bitlen >> (8 * i)) & 0xff));
  for (size_t off = 0; off < msg.size(); off += 64) {
    std::uint32_t w[64];
    for (int t = 0; t < 16; ++t)
      w[t] = (static_cast<std::uint8_t>(msg[off + 4 * t]) << 24) |
             (static_cast<std::uint8_t>(msg[off + 4 * t + 1]) << 16) |
             (static_cast<std::uint8_t>(msg[off + 4 * t + 2]) << 8) |
             static_cast<std::uint8_t>(msg[off + 4 * t + 3]);
    for (int t = 16; t < 64; ++t) {
      const std::uint32_t s0 = rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
      const std::uint32_t s1 = rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
      w[t] = w[t - 16] + s0 + w[t - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6],
                  hh = h[7];
    for (int t = 0; t < 64; ++t) {
      const std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = hh + S1 + ch + kK[t] + w[t];
      const std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = S0 + maj;
      hh = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
    h[5] += f;
    h[6] += g;
    h[7] += hh;
  }
  std::ostringstream os;
  for (std::uint32_t v : h) {
    char buf[9];
    std::snprintf(buf, sizeof(buf), "%08x", v);
    os << buf;
  }
  return os.str();
}

// ---- parsing -----------------------------------------------------------------

namespace {
ov::cplx parse_cplx(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("re") || !j.contains("im"))
    fail(errc::bad_config, "complex values need {re, im}");
  return {j["re"].get<double>(), j["im"].get<double>()};
}
} // namespace

ov::OVParams parse_ov_params(const nlohmann::json& j) {
  ov::OVParams p;
  if (!j.contains("lambda") || !j.contains("R") || !j.contains("spectrum"))
    fail(errc::bad_config, "ov params need lambda, R, spectrum");
  p.lambda = parse_cplx(j["lambda"]);
  p.R = j["R"].get<double>();
  std::map<int, std::int64_t> sym;
  for (auto& [key, val] : j["spectrum"].items()) {
    const int q = std::stoi(key);
    if (q == 0) fail(errc::bad_config, "spectrum key q = 0");
    sym[q] = val.get<std::int64_t>();
  }
  for (auto& [q, om] : sym) {
    if (q < 0) {
      auto it = sym.find(-q);
      if (it != sym.end() && it->second != om)
        fail(errc::bad_config, "spectrum must satisfy Omega_q = Omega_{-q}");
      continue;
    }
    p.spectrum[q] = om;
  }
  if (j.contains("tau0")) p.tau0 = parse_cplx(j["tau0"]);
  p.validate();
  return p;
}

hyperholo::ConnectionParams parse_connection_params(const nlohmann::json& j,
                                                    const ov::OVParams& host) {
  hyperholo::ConnectionParams c;
  c.host = host;
  if (!j.contains("delta") || !j.contains("omega") || !j.contains("lambda1"))
    fail(errc::bad_config, "connection params need delta, omega, lambda1");
  // delta and omega_q are exact rationals; accept "p/q" strings or numbers
  auto parse_rat = [](const nlohmann::json& v) -> hyperholo::Rational {
    if (v.is_string()) return hyperholo::Rational(v.get<std::string>());
    const double d = v.get<double>();
    // doubles from configs are halves/integers in practice; snap to /2
    return hyperholo::Rational(static_cast<long long>(std::llround(d * 2)), 2);
  };
  c.delta = parse_rat(j["delta"]);
  for (auto& [key, val] : j["omega"].items()) {
    const int q = std::stoi(key);
    if (q <= 0) fail(errc::bad_config, "omega keys are q > 0");
    c.omega[q] = parse_rat(val);
  }
  c.lambda1 = parse_cplx(j["lambda1"]);
  if (j.contains("tail"))
    for (auto& w : j["tail"]) c.tail.push_back(parse_cplx(w));
  c.validate();
  return c;
}

localmodel::EllipticSurface parse_surface(const nlohmann::json& j) {
  localmodel::EllipticSurface s;
  if (!j.contains("a") || !j.contains("b") || !j.contains("sigma0"))
    fail(errc::bad_config, "surface needs a, b, sigma0");
  s.a = parse_cplx(j["a"]);
  s.b = parse_cplx(j["b"]);
  s.sigma0 = parse_cplx(j["sigma0"]);
  s.validate();
  return s;
}

ChamberDoc parse_chamber(const nlohmann::json& j, algebra::ContextPtr ctx) {
  ChamberDoc doc;
  doc.Z.ctx = ctx;
  doc.data.ctx = ctx;
  if (!j.contains("charges") || !j.contains("Z"))
    fail(errc::bad_config, "chamber needs charges and Z");
  const int n = ctx->rank();
  doc.Z.z_basis.resize(n);
  for (int k = 0; k < n; ++k)
    doc.Z.z_basis[k] = parse_cplx(j["Z"][std::to_string(k)]);
  std::vector<algebra::IntVec> charges;
  for (auto& c : j["charges"]) {
    algebra::IntVec v;
    for (auto& x : c) v.push_back(x.get<std::int64_t>());
    if (static_cast<int>(v.size()) != n) fail(errc::bad_config, "charge length mismatch");
    charges.push_back(v);
  }
  if (j.contains("omega")) {
    for (auto& [key, val] : j["omega"].items()) {
      // key "q,p"
      algebra::IntVec v;
      std::stringstream ss(key);
      std::string tok;
      while (std::getline(ss, tok, ',')) v.push_back(std::stoll(tok));
      if (static_cast<int>(v.size()) != n) fail(errc::bad_config, "omega key length");
      doc.data.omega[v] = val.get<std::int64_t>();
    }
  }
  return doc;
}

// ---- outputs -----------------------------------------------------------------

Report::Report(std::string command, std::string config_text)
    : command_(std::move(command)), digest_(sha256_hex(config_text)) {}

void Report::set_error(const std::string& code, const std::string& what) {
  status_ = "error";
  metrics_["error_code"] = code;
  metrics_["error"] = what;
}

void Report::metric(const std::string& key, double value) {
  metrics_[key] = fmt_double(value);
  raw_[key] = true;
}

void Report::metric(const std::string& key, const std::string& value) {
  metrics_[key] = value;
}

void Report::metric(const std::string& key, bool value) {
  metrics_[key] = value ? "true" : "false";
  raw_[key] = true;
}

std::string Report::to_json_string() const {
  std::ostringstream os;
  os << "{\"command\":\"" << command_ << "\",\"inputs_digest\":\"" << digest_
     << "\",\"metrics\":{";
  bool first = true;
  for (auto& [k, v] : metrics_) {
    if (!first) os << ",";
    first = false;
    os << "\"" << k << "\":";
    if (raw_.count(k))
      os << v;
    else
      os << "\"" << v << "\"";
  }
  os << "},\"status\":\"" << status_ << "\",\"version\":\"" << kToolVersion << "\"}\n";
  return os.str();
}

void Report::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(errc::io_error, "cannot open " + path);
  f << to_json_string();
}

Csv::Csv(std::vector<std::string> header) : header_(std::move(header)) {}

void Csv::row(const std::vector<double>& values) {
  if (values.size() != header_.size()) fail(errc::io_error, "csv row width mismatch");
  rows_.push_back(values);
}

std::string Csv::text() const {
  std::ostringstream os;
  for (size_t k = 0; k < header_.size(); ++k) os << (k ? "," : "") << header_[k];
  os << "\n";
  for (auto& r : rows_) {
    for (size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << fmt_double(r[k]);
    os << "\n";
  }
  return os.str();
}

void Csv::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(errc::io_error, "cannot open " + path);
  f << text();
}

} // namespace wallcross::report
