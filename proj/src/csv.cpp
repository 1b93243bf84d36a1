#include "admctl/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace admctl {

namespace {

void append_double(std::string &out, double v) {
    out += format_double(v);
}

std::vector<std::string> split(const std::string &line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

long parse_long(const std::string &field, const char *what) {
    long value = 0;
    const char *first = field.data();
    const char *last = first + field.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last)
        throw validation_error(std::string("bad ") + what + " field: \"" + field + "\"");
    return value;
}

} // namespace

std::string policy_csv(const SspModel &model, const Policy &policy) {
    const bool augmented = model.levels > 1;
    std::string out = augmented ? "k,x,w,i,action,R_of_action\n" : "k,x,i,action,R_of_action\n";
    for (int k = 0; k < model.disc.stages; ++k) {
        for (int x = 0; x <= model.disc.steps; ++x) {
            for (int w = 0; w < model.levels; ++w) {
                const long state = model.state_of(w, x, k);
                const int a = policy.actions[static_cast<std::size_t>(state)];
                out += std::to_string(k);
                out += ',';
                out += std::to_string(x);
                out += ',';
                if (augmented) {
                    out += std::to_string(model.signed_level(w));
                    out += ',';
                }
                out += std::to_string(state + 1);
                out += ',';
                out += std::to_string(a + 1);
                out += ',';
                append_double(out, model.control.actions[static_cast<std::size_t>(a)].elastic_rate);
                out += '\n';
            }
        }
    }
    return out;
}

std::string value_csv(const SspModel &model, const CostVector &cost) {
    const bool augmented = model.levels > 1;
    std::string out = augmented ? "i,x,w,k,J,J_E,J_I,J_0\n" : "i,x,k,J,J_E,J_I,J_0\n";
    const long n = model.state_count();
    for (long state = 0; state < n; ++state) {
        const SspModel::Cell cell = model.cell_of_state(state);
        out += std::to_string(state + 1);
        out += ',';
        out += std::to_string(cell.x);
        out += ',';
        if (augmented) {
            out += std::to_string(model.signed_level(cell.level_slot));
            out += ',';
        }
        out += std::to_string(cell.k);
        out += ',';
        const auto s = static_cast<std::size_t>(state);
        append_double(out, cost.total[s]);
        out += ',';
        append_double(out, cost.elastic.empty() ? 0.0 : cost.elastic[s]);
        out += ',';
        append_double(out, cost.inelastic.empty() ? 0.0 : cost.inelastic[s]);
        out += ',';
        append_double(out, cost.ratebound.empty() ? 0.0 : cost.ratebound[s]);
        out += '\n';
    }
    return out;
}

std::string risk_csv(std::span<const EnvelopePoint> envelope) {
    std::string out = "k,t,theta,sigma,s_mean,s_low,s_high,miss_risk_to_date\n";
    for (const EnvelopePoint &p : envelope) {
        out += std::to_string(p.stage);
        out += ',';
        append_double(out, p.time);
        out += ',';
        append_double(out, p.theta);
        out += ',';
        append_double(out, p.sigma);
        out += ',';
        append_double(out, p.s_mean);
        out += ',';
        append_double(out, p.s_low);
        out += ',';
        append_double(out, p.s_high);
        out += ',';
        append_double(out, p.miss_risk);
        out += '\n';
    }
    return out;
}

std::string trajectory_csv(const Trajectory &trajectory) {
    std::string out = "k,t,x,w,s,action,R,stage_reward,cumulative_reward,done\n";
    for (const TrajectoryPoint &p : trajectory.points) {
        out += std::to_string(p.stage);
        out += ',';
        append_double(out, p.time);
        out += ',';
        out += std::to_string(p.step);
        out += ',';
        out += std::to_string(p.level);
        out += ',';
        append_double(out, p.remaining);
        out += ',';
        out += std::to_string(p.action);
        out += ',';
        append_double(out, p.elastic_rate);
        out += ',';
        append_double(out, p.stage_reward);
        out += ',';
        append_double(out, p.cumulative_reward);
        out += ',';
        out += p.done ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string lambda_sweep_csv(std::span<const LambdaSweepRow> rows) {
    std::string out = "lambda,elastic_utility,inelastic_utility\n";
    for (const LambdaSweepRow &r : rows) {
        append_double(out, r.lambda);
        out += ',';
        append_double(out, r.elastic_utility);
        out += ',';
        append_double(out, r.inelastic_utility);
        out += '\n';
    }
    return out;
}

std::string ratebound_sweep_csv(std::span<const RateBoundSweepRow> rows) {
    std::string out = "R0,B_true,elastic_utility_nominal_policy,inelastic_utility_nominal_policy,"
                      "elastic_utility_omniscient,inelastic_utility_omniscient\n";
    for (const RateBoundSweepRow &r : rows) {
        append_double(out, r.rate_bound);
        out += ',';
        append_double(out, r.true_bandwidth);
        out += ',';
        append_double(out, r.elastic_nominal);
        out += ',';
        append_double(out, r.inelastic_nominal);
        out += ',';
        append_double(out, r.elastic_omniscient);
        out += ',';
        append_double(out, r.inelastic_omniscient);
        out += '\n';
    }
    return out;
}

Policy parse_policy_csv(const std::string &text, const SspModel &model) {
    std::vector<std::string> lines = split(text, '\n');
    while (!lines.empty() && lines.back().empty())
        lines.pop_back();
    if (lines.empty())
        throw validation_error("policy file is empty");

    const bool augmented = lines[0] == "k,x,w,i,action,R_of_action";
    if (!augmented && lines[0] != "k,x,i,action,R_of_action")
        throw validation_error("policy file has an unrecognized header: " + lines[0]);
    if (augmented != (model.levels > 1))
        throw validation_error("policy file level columns do not match the model");

    Policy policy;
    policy.actions.assign(static_cast<std::size_t>(model.state_count()), 0);
    std::vector<char> seen(policy.actions.size(), 0);
    const std::size_t fields = augmented ? 6 : 5;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto row = split(lines[li], ',');
        if (row.size() != fields)
            throw validation_error("policy row " + std::to_string(li) + " has " +
                                   std::to_string(row.size()) + " fields");
        const long k = parse_long(row[0], "stage");
        const long x = parse_long(row[1], "step");
        const long w = augmented ? parse_long(row[2], "level") : 0;
        const long i = parse_long(row[augmented ? 3 : 2], "state index");
        const long action = parse_long(row[augmented ? 4 : 3], "action");
        if (k < 0 || k >= model.disc.stages)
            throw validation_error("policy row " + std::to_string(li) + " stage out of range");
        if (x < 0 || x > model.disc.steps)
            throw validation_error("policy row " + std::to_string(li) + " step out of range");
        const long slot = w + model.urgency_levels;
        if (slot < 0 || slot >= model.levels)
            throw validation_error("policy row " + std::to_string(li) + " level out of range");
        if (action < 1 || action > model.action_count())
            throw validation_error("policy row " + std::to_string(li) + " action out of range");
        const long state = model.state_of(static_cast<int>(slot), static_cast<int>(x),
                                          static_cast<int>(k));
        if (i != state + 1)
            throw validation_error("policy row " + std::to_string(li) +
                                   " state index does not match its cell");
        if (seen[static_cast<std::size_t>(state)])
            throw validation_error("policy row " + std::to_string(li) + " repeats a state");
        seen[static_cast<std::size_t>(state)] = 1;
        policy.actions[static_cast<std::size_t>(state)] = static_cast<int>(action - 1);
    }
    for (int k = 0; k < model.disc.stages; ++k)
        for (int x = 0; x <= model.disc.steps; ++x)
            for (int w = 0; w < model.levels; ++w)
                if (!seen[static_cast<std::size_t>(model.state_of(w, x, k))])
                    throw validation_error("policy file does not cover every decision state");
    return policy;
}

void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw validation_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace admctl
