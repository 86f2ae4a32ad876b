#include "bellsim/json_io.hpp"

#include <string>

namespace bellsim {

using nlohmann::json;

namespace {

std::string sign_label(int index) { return index == 0 ? "+" : "-"; }

JointTable table_from_json(const json& j, const char* name) {
  if (!j.contains(name)) throw ModelError(std::string(name) + ": missing");
  const json& t = j.at(name);
  if (!t.is_array() || t.size() != 2) {
    throw ModelError(std::string(name) + ": expected a 2x2 array");
  }
  JointTable out{};
  for (std::size_t x = 0; x < 2; ++x) {
    if (!t[x].is_array() || t[x].size() != 2) {
      throw ModelError(std::string(name) + ": expected a 2x2 array");
    }
    for (std::size_t y = 0; y < 2; ++y) {
      if (!t[x][y].is_number()) throw ModelError(std::string(name) + ": non-numeric entry");
      out[x][y] = t[x][y].get<double>();
    }
  }
  return out;
}

json table_json(const JointTable& t) {
  return json::array({json::array({t[0][0], t[0][1]}), json::array({t[1][0], t[1][1]})});
}

json pair_json(const ConditionPair& p) { return json::array({p.first, p.second}); }

}  // namespace

BinaryEventModel model_from_json(const json& j) {
  if (!j.is_object()) throw ModelError("model: expected a JSON object");
  if (!j.contains("p_z") || !j.at("p_z").is_number()) throw ModelError("p_z: missing or non-numeric");
  BinaryEventModel m;
  m.p_z = j.at("p_z").get<double>();
  m.given_z = table_from_json(j, "joint_given_z");
  m.given_not_z = table_from_json(j, "joint_given_not_z");
  m.validate();
  return m;
}

void to_json(json& j, const BinaryEventModel& m) {
  j = json{{"p_z", m.p_z},
           {"joint_given_z", table_json(m.given_z)},
           {"joint_given_not_z", table_json(m.given_not_z)}};
}

void to_json(json& j, const ConditionResult& c) {
  j = json{{"name", c.name},     {"holds", c.holds}, {"vacuous", c.vacuous},
           {"lhs", c.lhs},       {"rhs", c.rhs},     {"margin", c.margin}};
}

void to_json(json& j, const CommonCauseReport& r) {
  j = json{{"cause_relevance", pair_json(r.relevance)},
           {"cause_relevance_y_reversed", pair_json(r.relevance_reversed)},
           {"screening_off", pair_json(r.screening)},
           {"factorization", pair_json(r.factorization)},
           {"unconditional",
            {{"pr_x_and_y", r.unconditional_xy},
             {"pr_x", r.unconditional_x},
             {"pr_y", r.unconditional_y},
             {"correlation", r.unconditional_correlation},
             {"correlated", r.correlated}}},
           {"certified", r.certified}};
}

void to_json(json& j, const EmpiricalStats& s) {
  json cells = json::object();
  json by_lambda = json::object();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const std::string key = sign_label(a) + sign_label(b);
      cells[key] = s.histogram.cells[a][b];
      for (int l = 0; l < 2; ++l) {
        by_lambda[l == 0 ? "lambda+-" : "lambda-+"][key] = s.histogram.by_lambda[l][a][b];
      }
    }
  }
  j = json{{"trials", s.trials},
           {"mean1", s.mean1},
           {"mean2", s.mean2},
           {"pair_mean", s.pair_mean},
           {"covariance", s.covariance},
           {"standard_error", s.standard_error()},
           {"histogram", cells},
           {"histogram_by_lambda", by_lambda}};
}

void to_json(json& j, const DescriptionComparison& c) {
  j = json{{"target", c.target},
           {"alice", c.alice},
           {"bob", c.bob},
           {"discrepancy", c.discrepancy},
           {"single_tolerance", c.single_tolerance},
           {"combined_tolerance", c.combined_tolerance},
           {"alice_matches", c.alice_matches},
           {"bob_matches", c.bob_matches},
           {"descriptions_agree", c.descriptions_agree},
           {"passed", c.passes()}};
}

void to_json(json& j, const ChshResult& r) {
  j = json{{"mode", r.mode == ChshMode::analytic ? "analytic" : "empirical"},
           {"terms",
            {{"E(a,b)", r.terms[0]},
             {"E(a,b')", r.terms[1]},
             {"E(a',b)", r.terms[2]},
             {"E(a',b')", r.terms[3]}}},
           {"value", r.value},
           {"local_bound", kLocalBound},
           {"exceeds_local_bound", r.exceeds_local_bound()}};
  if (r.mode == ChshMode::empirical) {
    j["trials_per_context"] = r.trials_per_context;
    j["standard_error"] = r.standard_error;
  }
}

namespace balls {

namespace {

json moments_json(const Moments& m) {
  return json{{"alice_mean", m.alice_mean},
              {"bob_mean", m.bob_mean},
              {"pair_mean", m.pair_mean},
              {"correlation", m.correlation}};
}

json joint_json(const StageConfig& c, const SignTable& f, const SignCounts* counts) {
  json rows = json::array();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      json row{{"event", "(" + to_string(c.alice_filter) + "_A" + sign_label(a) + ";" +
                             to_string(c.bob_filter) + "_B" + sign_label(b) + ")"},
               {"frequency", f[a][b]}};
      if (counts) row["count"] = (*counts)[a][b];
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

void to_json(json& j, const AggregateReport& r) {
  const bool empirical = r.mode == EvaluationMode::empirical;
  j = json{{"mode", empirical ? "empirical" : "analytic"},
           {"stage", r.config.stage},
           {"alice_filter", to_string(r.config.alice_filter)},
           {"bob_filter", to_string(r.config.bob_filter)},
           {"registered_fraction", r.registered_fraction},
           {"joint", joint_json(r.config, r.frequencies, empirical ? &r.counts : nullptr)},
           {"moments", moments_json(r.moments)}};
  if (empirical) {
    j["trials"] = r.config.trials;
    j["registered_trials"] = r.registered_trials;
    j["alice"] = {{"passages", r.alice_passages}, {"registered", r.alice_registered}};
    j["bob"] = {{"passages", r.bob_passages}, {"registered", r.bob_registered}};
  }
  json algs = json::array();
  for (const AlgorithmBreakdown& alg : r.algorithms) {
    json a{{"algorithm", to_string(alg.id)},
           {"weight", alg.weight},
           {"joint", joint_json(r.config, alg.frequencies, empirical ? &alg.counts : nullptr)},
           {"moments", moments_json(alg.moments)},
           {"conditional_correlation", alg.moments.correlation}};
    if (empirical) a["registered"] = alg.registered;
    algs.push_back(std::move(a));
  }
  j["algorithms"] = std::move(algs);
}

void to_json(json& j, const BellInequalityReport& r) {
  j = json{{"inequality", "Pr(a_A+;b_B+) <= Pr(a_A+;c_B+) + Pr(c_A+;b_B+)"},
           {"lhs", r.lhs},
           {"rhs_terms", {{"Pr(a_A+;c_B+)", r.rhs_terms[0]}, {"Pr(c_A+;b_B+)", r.rhs_terms[1]}}},
           {"rhs", r.rhs},
           {"violated", r.violated}};
}

void to_json(json& j, const ContextualDecomposition& d) {
  json contexts = json::array();
  for (const ContextTerm& t : d.contexts) {
    contexts.push_back(
        {{"algorithm", to_string(t.algorithm)}, {"conditional", t.conditional}, {"weight", t.weight}});
  }
  j = json{{"stage", d.stage},
           {"event", "(" + to_string(d.alice_color) + "_A" + sign_label(spin_index(d.alice_sign)) +
                         ";" + to_string(d.bob_color) + "_B" + sign_label(spin_index(d.bob_sign)) +
                         ")"},
           {"contexts", contexts},
           {"composed", d.composed},
           {"direct", d.direct}};
}

}  // namespace balls

}  // namespace bellsim
