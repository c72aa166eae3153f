#include "srl/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace srl {

nlohmann::json real_to_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double real_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("expected a number or one of \"inf\", \"-inf\", \"nan\"");
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "iter,emp_risk,dist_init,grad_norm,smooth_resid,selected\n";
  for (const auto& r : traj.records) {
    out << r.iter << ',' << format_real(r.emp_risk) << ',' << format_real(r.dist_init) << ','
        << format_real(r.grad_norm) << ',' << format_real(r.smooth_resid) << ','
        << (r.selected ? 1 : 0) << '\n';
  }
}

nlohmann::json trajectory_json(const Trajectory& traj) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : traj.records) {
    records.push_back({{"iter", r.iter},
                       {"emp_risk", r.emp_risk},
                       {"dist_init", r.dist_init},
                       {"grad_norm", r.grad_norm},
                       {"smooth_resid", real_to_json(r.smooth_resid)},
                       {"selected", r.selected}});
  }
  nlohmann::json j = {{"eta", traj.eta},
                      {"rho", traj.rho},
                      {"R_gd", real_to_json(traj.R_gd)},
                      {"status", traj.status == TrainStatus::ok ? "ok" : "diverged"},
                      {"records", records}};
  j["selected"] = traj.selected ? nlohmann::json(*traj.selected) : nlohmann::json(nullptr);
  if (!traj.message.empty()) j["message"] = traj.message;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace srl
