#include "gpjet/serialize.hpp"

#include <utility>
#include <vector>

#include "gpjet/errors.hpp"
#include "gpjet/format.hpp"

namespace gpjet::io {

namespace {

using GroupField = std::pair<const char*, double jet::DimensionlessGroups::*>;

const std::vector<GroupField>& group_fields() {
  using G = jet::DimensionlessGroups;
  static const std::vector<GroupField> fields{
      {"Re", &G::Re},       {"Ca", &G::Ca},       {"Pe", &G::Pe},         {"Pe_c", &G::Pe_c},
      {"De", &G::De},       {"Fe", &G::Fe},       {"Bi_L", &G::Bi_L},     {"Na", &G::Na},
      {"Gamma", &G::Gamma}, {"Bo", &G::Bo},       {"beta", &G::beta},     {"beta_E", &G::beta_E},
      {"alpha", &G::alpha}, {"chi", &G::chi},     {"A_f", &G::A_f},       {"theta_inf", &G::theta_inf},
  };
  return fields;
}

}  // namespace

std::string groups_table_csv(const jet::DimensionlessGroups& g) {
  const std::vector<std::pair<const char*, double>> rows{
      {"Bi", g.Bi_L}, {"De", g.De}, {"Bo", g.Bo},       {"Re", g.Re}, {"Ca", g.Ca},
      {"Na", g.Na},   {"Fe", g.Fe}, {"Gamma", g.Gamma}, {"Pe", g.Pe}, {"Pe_c", g.Pe_c},
  };
  std::string out = "parameter,value\n";
  for (const auto& [name, v] : rows) out += std::string(name) + ',' + shortest(v) + '\n';
  return out;
}

Json to_json(const jet::DimensionlessGroups& g) {
  Json j = Json::object();
  for (const auto& [name, member] : group_fields()) j[name] = g.*member;
  return j;
}

jet::DimensionlessGroups groups_from_json(const Json& j, jet::DimensionlessGroups base) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "groups must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const auto& [name, member] : group_fields()) {
      if (key != name) continue;
      if (!value.is_number()) fail(ErrorCode::ConfigError, "groups." + key + " must be a number");
      base.*member = value.get<double>();
      found = true;
    }
    if (!found) fail(ErrorCode::ConfigError, "unknown dimensionless group '" + key + "'");
  }
  if (!base.valid()) fail(ErrorCode::ConfigError, "dimensionless groups violate their invariants");
  return base;
}

Json to_json(const jet::RadiusProfile& p) { return Json{{"z", p.z_grid}, {"R", p.radii}}; }

Json gp_summary(const gp::GPModel& m) {
  const gp::KernelHyper raw = m.raw_hyper();
  return Json{{"lengthscale", raw.lengthscale},
              {"signal_variance", raw.signal_variance},
              {"noise_variance", raw.noise_variance},
              {"n", m.size()},
              {"log_marginal_likelihood", m.log_marginal_likelihood()},
              {"jitter", m.jitter()},
              {"degenerate", m.degenerate()}};
}

Json mf_summary(const mf::MFModel& m) {
  return Json{{"rho", m.rho}, {"low", gp_summary(m.low)}, {"err", gp_summary(m.err)},
              {"n_low", m.n_low()}, {"n_high", m.n_high()}};
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string optional_text(const std::optional<double>& v) { return v ? shortest(*v) : std::string(); }

}  // namespace

Json to_json(const planner::IterationRecord& r) {
  Json j{{"iter", r.iter},         {"x", r.x},       {"y", optional_number(r.y)},
         {"failed", r.failed},     {"rmse", r.rmse}, {"mciw", r.mciw},
         {"min_regret", optional_number(r.min_regret)}, {"lengthscale", r.lengthscale}};
  if (r.rho) j["rho"] = *r.rho;
  return j;
}

Json to_json(const planner::RunRecord& rec) {
  Json iters = Json::array();
  for (const auto& r : rec.iterations) iters.push_back(to_json(r));
  return Json{{"iterations", iters},
              {"aborted", rec.aborted},
              {"error", rec.error},
              {"best_x", optional_number(rec.best_x)},
              {"best_y", optional_number(rec.best_y)},
              {"successful", rec.successful},
              {"failures", rec.failures},
              {"penalty_x", rec.penalty_x}};
}

std::string run_jsonl(const planner::RunRecord& rec) {
  std::string out;
  for (const auto& r : rec.iterations) out += to_json(r).dump() + '\n';
  return out;
}

std::string run_csv(const planner::RunRecord& rec, bool header) {
  std::string out = header ? "iter,x,y,rmse,mciw,min_regret\n" : "";
  for (const auto& r : rec.iterations) {
    out += std::to_string(r.iter) + ',' + shortest(r.x) + ',' + optional_text(r.y) + ',' + shortest(r.rmse) + ',' +
           shortest(r.mciw) + ',' + optional_text(r.min_regret) + '\n';
  }
  return out;
}

}  // namespace gpjet::io
