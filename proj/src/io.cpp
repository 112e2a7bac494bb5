#include "oraclesim/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace oraclesim {

using njson = nlohmann::ordered_json;

std::string criterion_tag(RuntimeCriterion c) {
  return c == RuntimeCriterion::TraceDistance ? "trace-distance"
                                              : "success-prob";
}

RuntimeCriterion parse_criterion(const std::string& tag) {
  if (tag == "trace-distance") return RuntimeCriterion::TraceDistance;
  if (tag == "success-prob") return RuntimeCriterion::SuccessProbability;
  throw std::invalid_argument("unknown criterion '" + tag +
                              "' (use trace-distance or success-prob)");
}

std::string status_tag(RunStatus s) {
  switch (s) {
    case RunStatus::Reached: return "reached";
    case RunStatus::NotReached: return "not-reached";
    case RunStatus::ProvenUnreachable: return "proven-unreachable";
  }
  return "not-reached";
}

RunStatus parse_status(const std::string& tag) {
  if (tag == "reached") return RunStatus::Reached;
  if (tag == "not-reached") return RunStatus::NotReached;
  if (tag == "proven-unreachable") return RunStatus::ProvenUnreachable;
  throw std::invalid_argument("unknown run status '" + tag + "'");
}

std::string engine_tag(EngineKind e) {
  return e == EngineKind::FullSpace ? "full-space" : "reduced";
}

EngineKind parse_engine(const std::string& tag) {
  if (tag == "full-space") return EngineKind::FullSpace;
  if (tag == "reduced") return EngineKind::Reduced;
  throw std::invalid_argument("unknown engine '" + tag +
                              "' (use full-space or reduced)");
}

std::string method_tag(StepMethod m) {
  return m == StepMethod::FixedRk4 ? "fixed-rk4" : "adaptive-rk4";
}

StepMethod parse_method(const std::string& tag) {
  if (tag == "fixed-rk4") return StepMethod::FixedRk4;
  if (tag == "adaptive-rk4") return StepMethod::AdaptiveRk4;
  throw std::invalid_argument("unknown step method '" + tag +
                              "' (use fixed-rk4 or adaptive-rk4)");
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

namespace {
constexpr const char* kSweepHeader =
    "N,gamma,E,p,criterion,T_measured,T_bound,satisfied,wall_time_s";

std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

njson opt_json(const std::optional<double>& v) {
  return v ? njson(*v) : njson(nullptr);
}

std::optional<double> json_opt(const njson& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}
}  // namespace

std::string sweep_csv(const SweepResult& result) {
  std::string out = kSweepHeader;
  out += '\n';
  for (const SweepRow& row : result.rows) {
    out += std::to_string(row.n);
    out += ',';
    out += format_double(row.gamma);
    out += ',';
    out += format_double(row.energy);
    out += ',';
    out += format_double(row.p);
    out += ',';
    out += criterion_tag(row.criterion);
    out += ',';
    out += opt_cell(row.t_measured);
    out += ',';
    out += opt_cell(row.t_lower_bound);
    out += ',';
    out += row.satisfied ? "true" : "false";
    out += ',';
    out += format_double(row.wall_time_s);
    out += '\n';
  }
  return out;
}

std::vector<SweepRow> read_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepHeader)
    throw std::invalid_argument("unexpected CSV header: " + line);
  std::vector<SweepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != 9)
      throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                  ": expected 9 cells");
    SweepRow row;
    row.n = std::strtoll(cells[0].c_str(), nullptr, 10);
    row.gamma = std::strtod(cells[1].c_str(), nullptr);
    row.energy = std::strtod(cells[2].c_str(), nullptr);
    row.p = std::strtod(cells[3].c_str(), nullptr);
    row.criterion = parse_criterion(cells[4]);
    if (!cells[5].empty())
      row.t_measured = std::strtod(cells[5].c_str(), nullptr);
    if (!cells[6].empty())
      row.t_lower_bound = std::strtod(cells[6].c_str(), nullptr);
    if (cells[7] == "true")
      row.satisfied = true;
    else if (cells[7] == "false")
      row.satisfied = false;
    else
      throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                  ": satisfied must be true or false");
    row.wall_time_s = std::strtod(cells[8].c_str(), nullptr);
    row.status =
        row.t_measured ? RunStatus::Reached : RunStatus::NotReached;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_json(const SweepResult& result) {
  njson j;
  j["schema"] = "sweep-result/1";
  njson cfg;
  cfg["n_values"] = njson::array();
  for (const Eigen::Index n : result.spec.n_values)
    cfg["n_values"].push_back(static_cast<long long>(n));
  njson rule;
  if (result.spec.gamma_rule.kind == GammaRuleKind::Constant) {
    rule["kind"] = "constant";
    rule["gamma"] = result.spec.gamma_rule.gamma;
  } else {
    rule["kind"] = "power-law";
    rule["alpha"] = result.spec.gamma_rule.alpha;
    rule["delta"] = result.spec.gamma_rule.delta;
  }
  cfg["gamma_rule"] = rule;
  cfg["energy"] = result.spec.energy;
  cfg["p"] = result.spec.p;
  cfg["criterion"] = criterion_tag(result.spec.criterion);
  cfg["engine"] = engine_tag(result.spec.engine);
  cfg["t_max"] = result.spec.t_max;
  cfg["integrator"] = {{"method", method_tag(result.spec.integrator.method)},
                       {"step_size", result.spec.integrator.step_size},
                       {"error_tolerance",
                        result.spec.integrator.error_tolerance}};
  // jobs is an execution detail, not part of the reproduction recipe: rows
  // are identical for any worker count, and so should the file be
  cfg["seed"] = result.spec.seed;
  cfg["stable_output"] = result.spec.stable_output;
  j["config"] = cfg;

  j["rows"] = njson::array();
  for (const SweepRow& row : result.rows) {
    njson r;
    r["n"] = static_cast<long long>(row.n);
    r["gamma"] = row.gamma;
    r["energy"] = row.energy;
    r["p"] = row.p;
    r["criterion"] = criterion_tag(row.criterion);
    r["status"] = status_tag(row.status);
    r["t_measured"] = opt_json(row.t_measured);
    r["t_lower_bound"] = opt_json(row.t_lower_bound);
    r["satisfied"] = row.satisfied;
    r["d_max"] = row.d_max;
    r["t_searched"] = row.t_searched;
    r["wall_time_s"] = row.wall_time_s;
    r["error"] = row.error;
    j["rows"].push_back(r);
  }

  if (result.fit.present)
    j["fit"] = {{"exponent", result.fit.exponent},
                {"stderr_exponent", result.fit.stderr_exponent},
                {"log_prefactor", result.fit.log_prefactor},
                {"points", result.fit.points}};
  else
    j["fit"] = nullptr;

  j["cross_checks"] = njson::array();
  for (const CrossCheckRow& cc : result.cross_checks) {
    njson c;
    c["n"] = static_cast<long long>(cc.n);
    c["t_reduced"] = opt_json(cc.t_reduced);
    c["t_full"] = opt_json(cc.t_full);
    c["rel_diff"] = cc.rel_diff;
    c["error"] = cc.error;
    j["cross_checks"].push_back(c);
  }
  return j.dump(2) + "\n";
}

SweepResult read_sweep_json(const std::string& text) {
  const njson j = njson::parse(text);
  if (j.at("schema").get<std::string>() != "sweep-result/1")
    throw std::invalid_argument("unexpected JSON schema tag");
  SweepResult result;
  const njson& cfg = j.at("config");
  for (const njson& n : cfg.at("n_values"))
    result.spec.n_values.push_back(n.get<long long>());
  const njson& rule = cfg.at("gamma_rule");
  if (rule.at("kind").get<std::string>() == "constant") {
    result.spec.gamma_rule.kind = GammaRuleKind::Constant;
    result.spec.gamma_rule.gamma = rule.at("gamma").get<double>();
  } else {
    result.spec.gamma_rule.kind = GammaRuleKind::PowerLaw;
    result.spec.gamma_rule.alpha = rule.at("alpha").get<double>();
    result.spec.gamma_rule.delta = rule.at("delta").get<double>();
  }
  result.spec.energy = cfg.at("energy").get<double>();
  result.spec.p = cfg.at("p").get<double>();
  result.spec.criterion = parse_criterion(cfg.at("criterion"));
  result.spec.engine = parse_engine(cfg.at("engine"));
  result.spec.t_max = cfg.at("t_max").get<double>();
  result.spec.integrator.method =
      parse_method(cfg.at("integrator").at("method"));
  result.spec.integrator.step_size =
      cfg.at("integrator").at("step_size").get<double>();
  result.spec.integrator.error_tolerance =
      cfg.at("integrator").at("error_tolerance").get<double>();
  result.spec.seed = cfg.at("seed").get<std::uint64_t>();
  result.spec.stable_output = cfg.at("stable_output").get<bool>();

  for (const njson& r : j.at("rows")) {
    SweepRow row;
    row.n = r.at("n").get<long long>();
    row.gamma = r.at("gamma").get<double>();
    row.energy = r.at("energy").get<double>();
    row.p = r.at("p").get<double>();
    row.criterion = parse_criterion(r.at("criterion"));
    row.status = parse_status(r.at("status"));
    row.t_measured = json_opt(r.at("t_measured"));
    row.t_lower_bound = json_opt(r.at("t_lower_bound"));
    row.satisfied = r.at("satisfied").get<bool>();
    row.d_max = r.at("d_max").get<double>();
    row.t_searched = r.at("t_searched").get<double>();
    row.wall_time_s = r.at("wall_time_s").get<double>();
    row.error = r.at("error").get<std::string>();
    result.rows.push_back(std::move(row));
  }

  if (!j.at("fit").is_null()) {
    result.fit.present = true;
    result.fit.exponent = j.at("fit").at("exponent").get<double>();
    result.fit.stderr_exponent =
        j.at("fit").at("stderr_exponent").get<double>();
    result.fit.log_prefactor = j.at("fit").at("log_prefactor").get<double>();
    result.fit.points = j.at("fit").at("points").get<int>();
  }

  for (const njson& c : j.at("cross_checks")) {
    CrossCheckRow cc;
    cc.n = c.at("n").get<long long>();
    cc.t_reduced = json_opt(c.at("t_reduced"));
    cc.t_full = json_opt(c.at("t_full"));
    cc.rel_diff = c.at("rel_diff").get<double>();
    cc.error = c.at("error").get<std::string>();
    result.cross_checks.push_back(std::move(cc));
  }
  return result;
}

std::string trajectory_csv(const std::vector<ProgressSample>& samples) {
  std::string out =
      "t,success_prob,F_w,F_total,rate_direct,rate_closed_form,purity_w,"
      "trace_w\n";
  for (const ProgressSample& s : samples) {
    out += format_double(s.t);
    out += ',';
    out += format_double(s.success_prob);
    out += ',';
    out += format_double(s.f_w);
    out += ',';
    out += format_double(s.f_total);
    out += ',';
    out += format_double(s.rate_direct);
    out += ',';
    out += format_double(s.rate_closed_form);
    out += ',';
    out += format_double(s.purity_w);
    out += ',';
    out += format_double(s.trace_w);
    out += '\n';
  }
  return out;
}

std::string unravel_json(const UnravelReport& report) {
  njson j;
  j["schema"] = "unravel-report/1";
  j["n"] = static_cast<long long>(report.n);
  j["gamma_model"] = report.gamma_model;
  j["gamma_equivalent"] = report.gamma_equivalent;
  j["noise_std"] = report.noise_std;
  j["n_trajectories"] = report.n_trajectories;
  j["t_final"] = report.t_final;
  j["max_frobenius_distance"] = report.max_frobenius_distance;
  j["final_frobenius_distance"] = report.final_frobenius_distance;
  j["lindblad_decay_rate"] = report.lindblad_decay_rate;
  j["stochastic_decay_rate"] = report.stochastic_decay_rate;
  j["rate_ratio"] = std::isfinite(report.rate_ratio)
                        ? njson(report.rate_ratio)
                        : njson(nullptr);
  j["max_step_norm_dev"] = report.max_step_norm_dev;
  j["times"] = report.times;
  j["coherence_lindblad"] = report.coherence_lindblad;
  j["coherence_stochastic"] = report.coherence_stochastic;
  j["frobenius_distance"] = report.frobenius_distance;
  return j.dump(2) + "\n";
}

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r\n";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  return parse_config(read_file(path));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failed for " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace oraclesim
