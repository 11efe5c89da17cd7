#include "pmnl/serialization.hpp"

#include <istream>
#include "json.hpp"
#include <ostream>

#include "pmnl/errors.hpp"

namespace pmnl {

using ojson = nlohmann::ordered_json;

namespace {

ojson vec_json(const Vec& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec json_vec(const ojson& a) {
  if (!a.is_array()) throw InvalidInput("expected a JSON array of numbers");
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

ojson mat_json(const Mat& m) {
  ojson a = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

Mat json_mat(const ojson& a, Eigen::Index cols) {
  if (!a.is_array()) throw InvalidInput("expected a JSON array of rows");
  Mat m(static_cast<Eigen::Index>(a.size()), cols);
  for (std::size_t r = 0; r < a.size(); ++r) {
    const Vec row = json_vec(a[r]);
    if (row.size() != cols) throw InvalidInput("ragged matrix row");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

ojson parse_line(std::string_view line) {
  try {
    return ojson::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed JSONL record: ") + e.what());
  }
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed JSONL record: ") + e.what());
  }
}

}  // namespace

std::string observation_to_json(const PeriodObservation& o) {
  ojson j;
  j["period"] = o.period;
  j["assortment"] = o.action.assortment;
  j["prices"] = vec_json(o.action.prices);
  j["features"] = mat_json(o.features.z);
  j["arrivals"] = o.arrivals;
  j["purchases"] = o.purchases;
  j["no_purchase"] = o.no_purchase;
  return j.dump();
}

PeriodObservation observation_from_json(std::string_view line) {
  const ojson j = parse_line(line);
  return guarded([&] {
    PeriodObservation o;
    o.period = j.at("period").get<long>();
    o.action.assortment = j.at("assortment").get<std::vector<int>>();
    o.action.prices = json_vec(j.at("prices"));
    const auto& rows = j.at("features");
    const Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size());
    o.features.z = json_mat(rows, cols);
    o.features.period = o.period;
    o.arrivals = j.at("arrivals").get<long>();
    o.purchases = j.at("purchases").get<std::vector<long>>();
    o.no_purchase = j.at("no_purchase").get<long>();
    validate_observation(o);
    return o;
  });
}

void write_history_jsonl(std::ostream& out, const History& history) {
  for (const auto& o : history) out << observation_to_json(o) << '\n';
}

History read_history_jsonl(std::istream& in) {
  History history;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    history.append(observation_from_json(line));
  }
  return history;
}

void write_fisher_jsonl(std::ostream& out, const FisherState& state) {
  ojson header;
  header["record"] = "header";
  header["dim_x"] = state.dim_x();
  header["dim_z"] = state.dim_z();
  header["base_rate"] = state.base_rate();
  header["x_bar"] = state.x_bar();
  header["periods"] = state.periods();
  out << header.dump() << '\n';
  for (std::size_t s = 0; s < state.xs().size(); ++s) {
    const auto& c = state.choices()[s];
    ojson rec;
    rec["record"] = "period";
    rec["x"] = vec_json(state.xs()[s]);
    rec["z"] = mat_json(c.z);
    rec["prices"] = vec_json(c.prices);
    rec["counts"] = vec_json(c.counts);
    rec["arrivals"] = c.arrivals;
    out << rec.dump() << '\n';
  }
  ojson trailer;
  trailer["record"] = "matrices";
  trailer["poisson"] = mat_json(state.poisson());
  trailer["mnl_hat"] = mat_json(state.mnl_hat());
  out << trailer.dump() << '\n';
}

FisherState read_fisher_jsonl(std::istream& in) {
  std::string line;
  std::vector<ojson> records;
  while (std::getline(in, line)) {
    if (!line.empty()) records.push_back(parse_line(line));
  }
  return guarded([&] {
    if (records.size() < 2 || records.front().at("record") != "header" ||
        records.back().at("record") != "matrices") {
      throw InvalidInput("Fisher JSONL needs a header line and a matrices trailer");
    }
    const auto& h = records.front();
    const int dim_x = h.at("dim_x").get<int>();
    const int dim_z = h.at("dim_z").get<int>();
    std::vector<Vec> xs;
    std::vector<ChoicePeriod> choices;
    for (std::size_t i = 1; i + 1 < records.size(); ++i) {
      const auto& r = records[i];
      if (r.at("record") != "period") throw InvalidInput("unexpected Fisher JSONL record");
      xs.push_back(json_vec(r.at("x")));
      ChoicePeriod c;
      c.z = json_mat(r.at("z"), dim_z);
      c.prices = json_vec(r.at("prices"));
      c.counts = json_vec(r.at("counts"));
      c.arrivals = r.at("arrivals").get<double>();
      choices.push_back(std::move(c));
    }
    if (static_cast<long>(xs.size()) != h.at("periods").get<long>()) {
      throw InvalidInput("Fisher JSONL period count does not match its header");
    }
    const auto& t = records.back();
    return FisherState::restore(dim_x, dim_z, h.at("base_rate").get<double>(),
                                h.at("x_bar").get<double>(), std::move(xs), std::move(choices),
                                json_mat(t.at("poisson"), dim_x), json_mat(t.at("mnl_hat"), dim_z));
  });
}

std::string diagnostics_to_json(const PeriodDiagnostics& d, std::string_view policy,
                                long replication) {
  ojson j;
  j["policy"] = std::string(policy);
  j["replication"] = replication;
  j["period"] = d.period;
  j["stage"] = d.stage;
  j["theta_hat"] = vec_json(d.theta_hat);
  j["v_hat"] = vec_json(d.v_hat);
  j["tau_theta"] = d.tau_theta;
  j["tau_v"] = d.tau_v;
  j["omega_theta"] = d.omega_theta;
  j["omega_v"] = d.omega_v;
  j["assortment"] = d.action.assortment;
  j["prices"] = vec_json(d.action.prices);
  j["plug_in"] = d.ucb.plug_in;
  j["poisson_bonus"] = d.ucb.poisson_bonus;
  j["mnl_bonus"] = d.ucb.mnl_bonus;
  j["poisson_clamped"] = d.ucb.poisson_clamped;
  j["mnl_clamped"] = d.ucb.mnl_clamped;
  j["theta_converged"] = d.theta_converged;
  j["v_converged"] = d.v_converged;
  j["theta_iterations"] = d.theta_iterations;
  j["v_iterations"] = d.v_iterations;
  return j.dump();
}

}  // namespace pmnl
