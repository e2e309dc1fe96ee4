#include "klpath/report.hpp"

namespace klpath {

void to_json(nlohmann::json& j, const ExperimentReport& r) {
  j = nlohmann::json{{"name", r.name},
                     {"params", r.params},
                     {"observed", r.observed},
                     {"reference", r.reference},
                     {"provenance", r.provenance},
                     {"tolerance", r.tolerance},
                     {"pass", r.pass},
                     {"seconds", r.seconds}};
}

void from_json(const nlohmann::json& j, ExperimentReport& r) {
  j.at("name").get_to(r.name);
  r.params = j.at("params");
  r.observed = j.at("observed");
  r.reference = j.at("reference");
  j.at("provenance").get_to(r.provenance);
  j.at("tolerance").get_to(r.tolerance);
  j.at("pass").get_to(r.pass);
  j.at("seconds").get_to(r.seconds);
}

}  // namespace klpath
