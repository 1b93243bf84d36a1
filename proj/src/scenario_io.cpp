#include "admctl/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace admctl {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json &obj, std::initializer_list<const char *> known,
                         const char *where) {
    for (const auto &item : obj.items()) {
        bool ok = false;
        for (const char *k : known)
            ok = ok || item.key() == k;
        if (!ok)
            throw validation_error(std::string("unknown key \"") + item.key() + "\" in " + where);
    }
}

const json &require(const json &obj, const char *key, const char *where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw validation_error(std::string("missing key \"") + key + "\" in " + where);
    return *it;
}

double number_of(const json &v, const char *what) {
    if (!v.is_number())
        throw validation_error(std::string(what) + " must be a number");
    return v.get<double>();
}

int integer_of(const json &v, const char *what) {
    if (!v.is_number_integer())
        throw validation_error(std::string(what) + " must be an integer");
    return v.get<int>();
}

std::vector<double> sequence_of(const json &v, const char *what) {
    if (!v.is_array() || v.empty())
        throw validation_error(std::string(what) + " must be a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto &e : v)
        out.push_back(number_of(e, what));
    return out;
}

ElasticRewardSpec parse_reward(const json &v) {
    if (v.is_number())
        return ElasticRewardSpec::constant(v.get<double>());
    if (!v.is_array())
        throw validation_error("elastic.reward must be a number or a table of [t, V] rows");
    std::vector<std::pair<double, double>> rows;
    rows.reserve(v.size());
    for (const auto &e : v) {
        if (!e.is_array() || e.size() != 2)
            throw validation_error("elastic.reward table rows must be [t, V] pairs");
        rows.emplace_back(number_of(e[0], "elastic.reward breakpoint time"),
                          number_of(e[1], "elastic.reward breakpoint value"));
    }
    return ElasticRewardSpec::table(std::move(rows));
}

InelasticStateSpec parse_stateful(const json &v) {
    if (!v.is_object())
        throw validation_error("stateful must be an object");
    reject_unknown_keys(v, {"D_p", "D_u", "pi", "epsilon", "gamma"}, "stateful");
    InelasticStateSpec spec;
    spec.persistence_levels = integer_of(require(v, "D_p", "stateful"), "stateful.D_p");
    spec.urgency_levels = integer_of(require(v, "D_u", "stateful"), "stateful.D_u");
    spec.stale_probs = sequence_of(require(v, "pi", "stateful"), "stateful.pi");
    spec.recover_probs = v.contains("epsilon")
                             ? sequence_of(v["epsilon"], "stateful.epsilon")
                             : std::vector<double>{1.0};
    spec.decay_probs = v.contains("gamma")
                           ? sequence_of(v["gamma"], "stateful.gamma")
                           : std::vector<double>{1.0};
    spec.validate();
    return spec;
}

} // namespace

bool ScenarioFile::has_stateful_flows() const {
    for (const auto &f : scenario.flows)
        if (f.stateful)
            return true;
    return false;
}

double ScenarioFile::stateful_load() const {
    double total = 0.0;
    for (const auto &f : scenario.flows)
        if (f.stateful)
            total += f.load;
    return total;
}

double ScenarioFile::stateful_reward_rate() const {
    double total = 0.0;
    for (const auto &f : scenario.flows)
        if (f.stateful)
            total += f.reward_rate;
    return total;
}

ScenarioFile parse_scenario_text(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception &e) {
        throw validation_error(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw validation_error("scenario document must be a JSON object");
    reject_unknown_keys(doc,
                        {"bandwidth", "elastic", "soft_deadline", "discretization",
                         "lambda_I", "rate_bound_R0", "flows", "stateful"},
                        "scenario");

    ScenarioFile out;
    out.scenario.bandwidth = number_of(require(doc, "bandwidth", "scenario"), "bandwidth");

    const json &elastic = require(doc, "elastic", "scenario");
    if (!elastic.is_object())
        throw validation_error("elastic must be an object");
    reject_unknown_keys(elastic, {"size", "deadline", "reward"}, "elastic");
    out.scenario.elastic_size = number_of(require(elastic, "size", "elastic"), "elastic.size");
    out.scenario.elastic_deadline =
        number_of(require(elastic, "deadline", "elastic"), "elastic.deadline");
    out.scenario.elastic_reward = parse_reward(require(elastic, "reward", "elastic"));

    if (doc.contains("soft_deadline")) {
        const json &soft = doc["soft_deadline"];
        if (!soft.is_object())
            throw validation_error("soft_deadline must be an object");
        reject_unknown_keys(soft, {"alpha", "beta"}, "soft_deadline");
        SoftDeadline sd;
        sd.alpha = number_of(require(soft, "alpha", "soft_deadline"), "soft_deadline.alpha");
        sd.beta = number_of(require(soft, "beta", "soft_deadline"), "soft_deadline.beta");
        out.scenario.soft_deadline = sd;
    }

    out.scenario.lambda_inelastic = number_of(require(doc, "lambda_I", "scenario"), "lambda_I");
    out.scenario.rate_bound =
        doc.contains("rate_bound_R0") ? number_of(doc["rate_bound_R0"], "rate_bound_R0") : 0.0;

    const json &flows = require(doc, "flows", "scenario");
    if (!flows.is_array())
        throw validation_error("flows must be an array");
    for (const auto &f : flows) {
        if (!f.is_object())
            throw validation_error("flow entries must be objects");
        reject_unknown_keys(f, {"load", "reward_rate", "stateful"}, "flow entry");
        InelasticFlowSpec spec;
        spec.load = number_of(require(f, "load", "flow entry"), "flow load");
        spec.reward_rate = number_of(require(f, "reward_rate", "flow entry"), "flow reward_rate");
        if (f.contains("stateful")) {
            if (!f["stateful"].is_boolean())
                throw validation_error("flow stateful flag must be a boolean");
            spec.stateful = f["stateful"].get<bool>();
        }
        out.scenario.flows.push_back(spec);
    }

    const json &disc = require(doc, "discretization", "scenario");
    if (!disc.is_object())
        throw validation_error("discretization must be an object");
    reject_unknown_keys(disc, {"M", "N"}, "discretization");
    const int steps = integer_of(require(disc, "M", "discretization"), "discretization.M");
    const int stages = integer_of(require(disc, "N", "discretization"), "discretization.N");

    out.scenario.validate();
    out.disc = Discretization::make(steps, stages, out.scenario.elastic_size,
                                    out.scenario.elastic_deadline);

    if (doc.contains("stateful"))
        out.stateful = parse_stateful(doc["stateful"]);
    if (out.has_stateful_flows() && !out.stateful)
        throw validation_error("flows are marked stateful but the scenario has no stateful section");
    if (out.stateful && !out.has_stateful_flows())
        throw validation_error("scenario has a stateful section but no flow is marked stateful");
    return out;
}

ScenarioFile load_scenario_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw validation_error("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

} // namespace admctl
