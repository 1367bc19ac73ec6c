#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wallcross/hyperholo.hpp"
#include "wallcross/localmodel.hpp"
#include "wallcross/ov.hpp"
#include "wallcross/wallcrossing.hpp"

namespace wallcross::report {

inline constexpr const char* kToolVersion = "wallcross 0.1.0";

// fixed %.15g float formatting for byte-stable artifacts
std::string fmt_double(double x);

std::string sha256_hex(const std::string& bytes);

// ---- config parsing (external interfaces) ----------------------------------

ov::OVParams parse_ov_params(const nlohmann::json& j);
hyperholo::ConnectionParams parse_connection_params(const nlohmann::json& j,
                                                    const ov::OVParams& host);
localmodel::EllipticSurface parse_surface(const nlohmann::json& j);

struct ChamberDoc {
  wcf::CentralCharge Z;
  wcf::BPSData data;
};
// {charges: [[q,p],...], omega: {"q,p": n}, mu: {...}, Z: {re, im per basis charge}}
ChamberDoc parse_chamber(const nlohmann::json& j, algebra::ContextPtr ctx);

// ---- deterministic outputs ---------------------------------------------------

class Report {
public:
  Report(std::string command, std::string config_text);

  void set_status(const std::string& s) { status_ = s; }
  void set_error(const std::string& code, const std::string& what);
  void metric(const std::string& key, double value);
  void metric(const std::string& key, const std::string& value);
  void metric(const std::string& key, bool value);

  std::string to_json_string() const; // sorted keys, %.15g floats
  void write(const std::string& path) const;

private:
  std::string command_, digest_, status_ = "ok";
  std::map<std::string, std::string> metrics_; // pre-formatted values
  std::map<std::string, bool> raw_;            // marks non-string JSON values
};

// CSV with a fixed header; rows rendered with fmt_double
class Csv {
public:
  explicit Csv(std::vector<std::string> header);
  void row(const std::vector<double>& values);
  void write(const std::string& path) const;
  std::string text() const;

private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

} // namespace wallcross::report
