#include "ssar/algorithms/metrics.hpp"

#include <fstream>

#include <json.hpp>

#include "ssar/error.hpp"

namespace ssar::algorithms {

using ordered_json = nlohmann::ordered_json;

std::string to_json_line(const MetricRecord& r) {
  ordered_json j;
  j["step"] = r.step;
  j["phase"] = r.phase;
  j["eval_return_mean"] = r.eval_return_mean;
  j["eval_return_std"] = r.eval_return_std;
  j["normalized_score"] = r.normalized_score;
  j["q_mean"] = r.q_mean;
  j["beta_mean"] = r.beta_mean;
  j["beta_min"] = r.beta_min;
  j["beta_max"] = r.beta_max;
  j["beta_scale"] = r.beta_scale;
  j["n"] = r.n;
  j["frozen"] = r.frozen;
  j["termination_stat"] = r.termination_stat;
  j["loss_actor"] = r.loss_actor;
  j["loss_critic"] = r.loss_critic;
  j["loss_beta"] = r.loss_beta;
  j["alpha"] = r.alpha;
  j["phi_hash"] = r.phi_hash;
  return j.dump();
}

MetricRecord parse_json_line(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const std::exception& e) {
    throw Error("bad_metrics", std::string("metrics line is not JSON: ") + e.what());
  }
  MetricRecord r;
  try {
    r.step = j.at("step").get<std::uint64_t>();
    r.phase = j.at("phase").get<std::string>();
    r.eval_return_mean = j.at("eval_return_mean").get<double>();
    r.eval_return_std = j.at("eval_return_std").get<double>();
    r.normalized_score = j.value("normalized_score", 0.0);
    r.q_mean = j.value("q_mean", 0.0);
    r.beta_mean = j.value("beta_mean", 0.0);
    r.beta_min = j.value("beta_min", 0.0);
    r.beta_max = j.value("beta_max", 0.0);
    r.beta_scale = j.value("beta_scale", 1.0);
    r.n = j.value("n", 0.0);
    r.frozen = j.value("frozen", false);
    r.termination_stat = j.value("termination_stat", 0.0);
    r.loss_actor = j.value("loss_actor", 0.0);
    r.loss_critic = j.value("loss_critic", 0.0);
    r.loss_beta = j.value("loss_beta", 0.0);
    r.alpha = j.value("alpha", 0.0);
    r.phi_hash = j.value("phi_hash", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad_metrics", std::string("metrics record malformed: ") + e.what());
  }
  return r;
}

void write_metrics(const std::filesystem::path& path, std::span<const MetricRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_error", "cannot open metrics file for writing", {{"path", path.string()}});
  for (const auto& r : records) out << to_json_line(r) << '\n';
  if (!out) throw Error("io_error", "failed writing metrics", {{"path", path.string()}});
}

std::vector<MetricRecord> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("metrics_not_found", "cannot open metrics file", {{"path", path.string()}});
  std::vector<MetricRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_json_line(line));
  return out;
}

}  // namespace ssar::algorithms
