// JSON conversions for models and reports (nlohmann::json, found via ADL).

#ifndef BELLSIM_JSON_IO_HPP
#define BELLSIM_JSON_IO_HPP

#include <json.hpp>

#include "bellsim/ball_protocol.hpp"
#include "bellsim/common_cause.hpp"
#include "bellsim/montecarlo.hpp"

namespace bellsim {

/// Reads {p_z, joint_given_z, joint_given_not_z}; tables are [[x&y, x&~y],
/// [~x&y, ~x&~y]]. Throws ModelError naming the offending field.
BinaryEventModel model_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const BinaryEventModel& m);
void to_json(nlohmann::json& j, const ConditionResult& c);
void to_json(nlohmann::json& j, const CommonCauseReport& r);
void to_json(nlohmann::json& j, const EmpiricalStats& s);
void to_json(nlohmann::json& j, const DescriptionComparison& c);
void to_json(nlohmann::json& j, const ChshResult& r);

namespace balls {

void to_json(nlohmann::json& j, const AggregateReport& r);
void to_json(nlohmann::json& j, const BellInequalityReport& r);
void to_json(nlohmann::json& j, const ContextualDecomposition& d);

}  // namespace balls

}  // namespace bellsim

#endif  // BELLSIM_JSON_IO_HPP
