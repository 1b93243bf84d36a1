#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>
#include <utility>
#include <vector>

#include "admctl/scenario.hpp"
#include "admctl/scenario_io.hpp"
#include "testlib.hpp"

using namespace admctl;

namespace {

LinkScenario baseline_scenario() {
    LinkScenario sc;
    sc.bandwidth = 200.0;
    sc.elastic_size = 240000.0;
    sc.elastic_deadline = 1800.0;
    sc.elastic_reward = ElasticRewardSpec::constant(1.0);
    sc.lambda_inelastic = 1.0;
    for (int i = 0; i < 25; ++i)
        sc.flows.push_back({0.1, 1.0, false});
    for (int i = 0; i < 25; ++i)
        sc.flows.push_back({3.0, 1.0, false});
    return sc;
}

} // namespace

TEST_CASE("discretization validation and indexing") {
    CHECK_THROWS_AS(Discretization::make(0, 5, 100.0, 10.0), validation_error);
    CHECK_THROWS_AS(Discretization::make(3, 2, 100.0, 10.0), validation_error);
    CHECK_THROWS_AS(Discretization::make(1, 1, 0.0, 10.0), validation_error);
    CHECK_THROWS_AS(Discretization::make(1, 1, 100.0, -1.0), validation_error);

    const auto d = Discretization::make(3, 5, 240.0, 10.0);
    CHECK(d.step_size == 80.0);
    CHECK(d.stage_length == 2.0);
    CHECK(d.state_count() == 24);
    CHECK(d.state_index(0, 0) == 1);
    CHECK(d.state_index(3, 5) == 24);
    for (int k = 0; k <= 5; ++k) {
        for (int x = 0; x <= 3; ++x) {
            const auto [cx, ck] = d.cell_of(d.state_index(x, k));
            CHECK(cx == x);
            CHECK(ck == k);
        }
    }
    CHECK_THROWS_AS(d.cell_of(0), validation_error);
    CHECK_THROWS_AS(d.cell_of(25), validation_error);
}

TEST_CASE("locate_state half-open cell conventions") {
    const auto d = Discretization::make(100, 100, 240000.0, 1800.0);
    CHECK(locate_state(d, 240000.0, 0.0).first == 0);
    CHECK(locate_state(d, 240000.0, 0.0).second == 0);
    CHECK(locate_state(d, 0.0, 1800.0).first == 100);
    CHECK(locate_state(d, 0.0, 1800.0).second == 100);

    // Cell x covers (S-(x+1)dS, S-x dS]: the lower edge belongs to the next cell.
    CHECK(locate_state(d, 237600.0, 0.0).first == 1);
    CHECK(locate_state(d, 237601.0, 0.0).first == 0);
    CHECK(locate_state(d, 1.0, 0.0).first == 99);
    CHECK(locate_state(d, 0.0, 0.0).first == 100);

    // Stage k covers [k dT, (k+1) dT): the upper edge belongs to the next stage.
    CHECK(locate_state(d, 240000.0, 18.0).second == 1);
    CHECK(locate_state(d, 240000.0, 17.9999).second == 0);
    CHECK(locate_state(d, 240000.0, 1800.0).second == 100);

    CHECK_THROWS_AS(locate_state(d, -1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(locate_state(d, 240001.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(locate_state(d, 0.0, 1801.0), std::domain_error);
}

TEST_CASE("elastic reward tables and the soft deadline") {
    const auto flat = ElasticRewardSpec::constant(2.0);
    CHECK(flat.value_at(17.3) == 2.0);
    CHECK_THROWS_AS(ElasticRewardSpec::constant(0.0).validate(10.0), validation_error);

    const auto table = ElasticRewardSpec::table({{600.0, 2.0}, {1800.0, 1.0}});
    table.validate(1800.0);
    CHECK(table.value_at(0.25) == 2.0);
    CHECK(table.value_at(600.0) == 2.0); // entry (t_i, V_i) covers (t_{i-1}, t_i]
    CHECK(table.value_at(600.5) == 1.0);
    CHECK_THROWS_AS(ElasticRewardSpec::table({{600.0, 2.0}, {600.0, 1.0}}).validate(1800.0),
                    validation_error);
    CHECK_THROWS_AS(ElasticRewardSpec::table({{600.0, 2.0}}).validate(1800.0),
                    validation_error);
    CHECK_THROWS_AS(ElasticRewardSpec::table({{600.0, -1.0}, {1800.0, 1.0}}).validate(1800.0),
                    validation_error);

    const std::optional<SoftDeadline> none;
    CHECK(elastic_reward_at(flat, none, 1800.0, 1800.0) == 2.0);
    CHECK(elastic_reward_at(flat, none, 1800.5, 1800.0) == 0.0);
    CHECK_THROWS_AS(elastic_reward_at(flat, none, 0.0, 1800.0), std::domain_error);

    const std::optional<SoftDeadline> soft = SoftDeadline{1.0 / 3.0, 0.5};
    CHECK(elastic_reward_at(flat, soft, 1200.0, 1800.0) == 3.0);
    CHECK(elastic_reward_at(flat, soft, 1200.5, 1800.0) == 2.0);
    CHECK(elastic_reward_at(flat, soft, 1800.0, 1800.0) == 2.0);

    // A vanishing premium recovers the base reward; alpha near 1 leaves
    // almost no premium region at all.
    const std::optional<SoftDeadline> faint = SoftDeadline{1.0 / 3.0, 1e-12};
    CHECK(elastic_reward_at(flat, faint, 900.0, 1800.0) ==
          doctest::Approx(2.0).epsilon(1e-11));
    const std::optional<SoftDeadline> late = SoftDeadline{0.999999, 0.5};
    CHECK(elastic_reward_at(flat, late, 2.0, 1800.0) == 2.0);
}

TEST_CASE("scenario validation") {
    auto sc = baseline_scenario();
    CHECK_NOTHROW(sc.validate());

    auto bad = sc;
    bad.bandwidth = 0.0;
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = sc;
    bad.lambda_inelastic = -0.5;
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = sc;
    bad.rate_bound = -1.0;
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = sc;
    bad.flows[3].load = -0.1;
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = sc;
    bad.soft_deadline = SoftDeadline{0.0, 0.5};
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = sc;
    bad.soft_deadline = SoftDeadline{1.0, 0.5};
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = sc;
    bad.soft_deadline = SoftDeadline{0.5, 0.0};
    CHECK_THROWS_AS(bad.validate(), validation_error);
}

TEST_CASE("control space nests voice before video") {
    const auto sc = baseline_scenario();
    auto space = build_control_space(sc.flows, sc.bandwidth);
    REQUIRE(space.action_count() == 51);
    CHECK_NOTHROW(space.validate_ordering());
    CHECK(space.actions[0].load == 0.0);
    CHECK(space.actions[0].elastic_rate == 200.0);
    CHECK(space.actions[0].member_flows.empty());

    // 0.1 Mbps flows carry ten times the reward density of the 3 Mbps ones,
    // so they fill the first 25 admissions.
    CHECK(space.actions[25].load == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(space.actions[26].load == doctest::Approx(5.5).epsilon(1e-12));
    CHECK(space.actions[50].load == doctest::Approx(77.5).epsilon(1e-12));
    CHECK(space.actions[50].elastic_rate == doctest::Approx(122.5).epsilon(1e-12));
    for (int a = 0; a <= 50; ++a) {
        CHECK(space.actions[static_cast<std::size_t>(a)].member_flows.size() ==
              static_cast<std::size_t>(a));
        CHECK(space.actions[static_cast<std::size_t>(a)].inelastic_reward_rate ==
              doctest::Approx(static_cast<double>(a)).epsilon(1e-12));
    }
}

TEST_CASE("equal reward density breaks ties toward the smaller load") {
    const std::vector<InelasticFlowSpec> flows{{2.5, 25.0, false},
                                               {21.0, 7.0, false},
                                               {18.0, 6.0, false},
                                               {18.0, 6.0, false},
                                               {18.0, 6.0, false}};
    const auto space = build_control_space(flows, 200.0);
    REQUIRE(space.action_count() == 6);
    const std::vector<double> expected{0.0, 2.5, 20.5, 38.5, 56.5, 77.5};
    for (std::size_t a = 0; a < expected.size(); ++a)
        CHECK(space.actions[a].load == expected[a]);
    // The three tied 18 Mbps groups precede the 21 Mbps group and keep
    // their input order among themselves.
    CHECK(space.actions[2].member_flows == std::vector<int>{0, 2});
    CHECK(space.actions[4].member_flows == std::vector<int>{0, 2, 3, 4});
    CHECK(space.actions[5].member_flows.back() == 1);
}

TEST_CASE("zero-load flows sort by whether they pay") {
    const std::vector<InelasticFlowSpec> flows{{5.0, 1.0, false},
                                               {0.0, 0.5, false},
                                               {0.0, 0.0, false}};
    const auto space = build_control_space(flows, 10.0);
    REQUIRE(space.action_count() == 4);
    CHECK(space.actions[1].member_flows == std::vector<int>{1}); // free reward first
    CHECK(space.actions[2].member_flows == std::vector<int>{1, 0});
    CHECK(space.actions[3].member_flows == std::vector<int>{1, 0, 2}); // inert flow last
    CHECK_NOTHROW(space.validate_ordering());
}

TEST_CASE("control space rejects bad inputs") {
    CHECK_THROWS_AS(build_control_space(std::vector<InelasticFlowSpec>{{6.0, 1.0, false},
                                                                       {5.0, 1.0, false}},
                                        10.0),
                    validation_error);
    CHECK_THROWS_AS(build_control_space(std::vector<InelasticFlowSpec>{{-1.0, 1.0, false}},
                                        10.0),
                    validation_error);
    CHECK_THROWS_AS(build_control_space(std::vector<InelasticFlowSpec>{}, 0.0),
                    validation_error);
}

TEST_CASE("validate_ordering flags manual corruption") {
    const auto sc = baseline_scenario();
    const auto space = build_control_space(sc.flows, sc.bandwidth);

    auto broken = space;
    broken.actions[3].load = broken.actions[2].load - 0.5;
    CHECK_THROWS_AS(broken.validate_ordering(), validation_error);

    broken = space;
    broken.actions[0].load = 0.25;
    CHECK_THROWS_AS(broken.validate_ordering(), validation_error);

    broken = space;
    broken.actions[7].inelastic_reward_rate = 0.0;
    CHECK_THROWS_AS(broken.validate_ordering(), validation_error);

    // Congestion-adjusted spaces legitimately break the ordering.
    broken.congestion_adjusted = true;
    CHECK_NOTHROW(broken.validate_ordering());
}

TEST_CASE("calibration pins the top action to one on-time completion") {
    const auto sc = baseline_scenario();
    const auto raw = build_control_space(sc.flows, sc.bandwidth);
    CHECK_FALSE(raw.calibrated);

    const auto space = calibrate_rewards(raw, sc.elastic_reward, sc.elastic_deadline);
    CHECK(space.calibrated);
    const double target = 1.0 / 1800.0;
    CHECK(space.actions[50].inelastic_reward_rate == target);
    for (int a = 0; a <= 50; ++a)
        CHECK(space.actions[static_cast<std::size_t>(a)].inelastic_reward_rate ==
              doctest::Approx(static_cast<double>(a) / 50.0 * target).epsilon(1e-12));
    CHECK_NOTHROW(space.validate_ordering());

    const auto again = calibrate_rewards(space, sc.elastic_reward, sc.elastic_deadline);
    for (int a = 0; a <= 50; ++a)
        CHECK(again.actions[static_cast<std::size_t>(a)].inelastic_reward_rate ==
              space.actions[static_cast<std::size_t>(a)].inelastic_reward_rate);

    ControlSpace empty;
    empty.bandwidth = 10.0;
    empty.actions.push_back({});
    CHECK_THROWS_AS(calibrate_rewards(empty, sc.elastic_reward, sc.elastic_deadline),
                    validation_error);
    const std::vector<InelasticFlowSpec> unpaid{{1.0, 0.0, false}};
    CHECK_THROWS_AS(calibrate_rewards(build_control_space(unpaid, 10.0), sc.elastic_reward,
                                      sc.elastic_deadline),
                    validation_error);
}

TEST_CASE("scenario files parse with strict keys") {
    const auto file = load_scenario_file(admctl::testing::scenario_path("baseline.json"));
    CHECK(file.scenario.bandwidth == 200.0);
    CHECK(file.scenario.flows.size() == 50);
    CHECK(file.disc.steps == 100);
    CHECK(file.disc.stages == 100);
    CHECK(file.scenario.lambda_inelastic == 1.0);
    CHECK(file.scenario.rate_bound == 0.0);
    CHECK_FALSE(file.stateful.has_value());
    CHECK_FALSE(file.has_stateful_flows());

    const auto option_b = load_scenario_file(admctl::testing::scenario_path("option_b.json"));
    CHECK(option_b.scenario.flows.size() == 5);

    const auto stateful =
        load_scenario_file(admctl::testing::scenario_path("three_action_stateful.json"));
    REQUIRE(stateful.stateful.has_value());
    CHECK(stateful.has_stateful_flows());
    CHECK(stateful.stateful_load() == 75.0);
    CHECK(stateful.stateful_reward_rate() == 25.0);
    CHECK(stateful.stateful->persistence_levels == 1);
    CHECK(stateful.stateful->urgency_levels == 0);
    CHECK(stateful.stateful->recover_probs == std::vector<double>{1.0});

    CHECK_THROWS_AS(load_scenario_file(admctl::testing::scenario_path("missing.json")),
                    validation_error);
}

TEST_CASE("scenario parsing rejects malformed documents") {
    const std::string ok = R"({
      "bandwidth": 10.0,
      "elastic": {"size": 100.0, "deadline": 10.0, "reward": 1.0},
      "discretization": {"M": 2, "N": 4},
      "lambda_I": 1.0,
      "flows": [{"load": 1.0, "reward_rate": 1.0}]
    })";
    CHECK_NOTHROW(parse_scenario_text(ok));

    CHECK_THROWS_AS(parse_scenario_text("{"), validation_error);
    CHECK_THROWS_AS(parse_scenario_text("[1,2]"), validation_error);

    auto mutate = [&](const std::string &from, const std::string &to) {
        std::string text = ok;
        text.replace(text.find(from), from.size(), to);
        return text;
    };
    CHECK_THROWS_AS(parse_scenario_text(mutate("\"bandwidth\"", "\"bandwidht\"")),
                    validation_error);
    CHECK_THROWS_AS(parse_scenario_text(mutate("\"lambda_I\": 1.0,", "")), validation_error);
    CHECK_THROWS_AS(parse_scenario_text(mutate("\"M\": 2", "\"M\": 2.5")), validation_error);
    CHECK_THROWS_AS(parse_scenario_text(mutate("\"M\": 2", "\"M\": 8")), validation_error);
    CHECK_THROWS_AS(parse_scenario_text(mutate("\"reward\": 1.0", "\"reward\": \"big\"")),
                    validation_error);

    // A reward table parses with its half-open interval semantics intact.
    const std::string table =
        mutate("\"reward\": 1.0", "\"reward\": [[5.0, 2.0], [10.0, 1.0]]");
    const auto parsed = parse_scenario_text(table);
    CHECK(parsed.scenario.elastic_reward.value_at(5.0) == 2.0);
    CHECK(parsed.scenario.elastic_reward.value_at(5.5) == 1.0);

    // Stateful flags and the stateful section must agree in both directions.
    CHECK_THROWS_AS(
        parse_scenario_text(mutate("\"reward_rate\": 1.0", "\"reward_rate\": 1.0, \"stateful\": true")),
        validation_error);
    CHECK_THROWS_AS(
        parse_scenario_text(mutate("\"lambda_I\": 1.0,",
                                   "\"lambda_I\": 1.0, \"stateful\": {\"D_p\": 1, \"D_u\": 0, \"pi\": [1.0]},")),
        validation_error);
}
