#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "srl/trainer.hpp"

namespace srl {

// JSON has no infinities; they travel as the strings "inf" / "-inf" and NaN
// as "nan". Finite values stay numbers (17 significant digits on output).
nlohmann::json real_to_json(double x);
// Accepts numbers, null (NaN) and the sentinels above. Throws
// std::invalid_argument otherwise.
double real_from_json(const nlohmann::json& j);

// iter,emp_risk,dist_init,grad_norm,smooth_resid,selected
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
nlohmann::json trajectory_json(const Trajectory& traj);

// 17 significant digits, or one of the sentinels.
std::string format_real(double x);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace srl
