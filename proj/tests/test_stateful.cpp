#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "admctl/pipeline.hpp"
#include "admctl/scenario_io.hpp"
#include "admctl/ssp.hpp"
#include "admctl/stateful.hpp"
#include "testlib.hpp"

using namespace admctl;
using namespace admctl::testing;

namespace {

InelasticStateSpec spec_a() {
    InelasticStateSpec spec;
    spec.persistence_levels = 3;
    spec.urgency_levels = 0;
    spec.stale_probs = {0.5, 0.3, 0.2};
    spec.recover_probs = {0.6, 0.4};
    spec.decay_probs = {1.0};
    return spec;
}

std::vector<double> step_levels(const std::vector<double> &f, const Matrix &m) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == 0.0)
            continue;
        for (std::size_t j = 0; j < f.size(); ++j)
            out[j] += f[i] * m(static_cast<int>(i), static_cast<int>(j));
    }
    return out;
}

} // namespace

TEST_CASE("state spec validation") {
    auto spec = spec_a();
    CHECK_NOTHROW(spec.validate());
    CHECK(spec.level_count() == 5);

    auto bad = spec;
    bad.persistence_levels = 0;
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = spec;
    bad.urgency_levels = -1;
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = spec;
    bad.stale_probs = {0.5, -0.1, 0.6};
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = spec;
    bad.stale_probs = {0.5, 0.4};
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = spec;
    bad.recover_probs = {};
    CHECK_THROWS_AS(bad.validate(), validation_error);

    // Mass within the tolerance is accepted and renormalized on use.
    auto close = spec;
    close.stale_probs = {0.5, 0.5 + 5e-13};
    CHECK_NOTHROW(close.validate());
    CHECK_NOTHROW(build_level_chain(close).validate());
}

TEST_CASE("persistence levels stale down and recover up") {
    const auto chain = build_level_chain(spec_a());
    CHECK(chain.level_count() == 5);
    CHECK(chain.suspension_slot() == 4);
    CHECK_NOTHROW(chain.validate());

    // Denying from level 1 stales by pi; overshoot past D_p suspends.
    CHECK(chain.deny(0, 0) == 1.0); // level 0 has nothing to stale
    CHECK(chain.deny(1, 1) == 0.5);
    CHECK(chain.deny(1, 2) == 0.3);
    CHECK(chain.deny(1, 3) == 0.2);
    CHECK(chain.deny(1, 4) == 0.0);
    CHECK(chain.deny(2, 2) == 0.5);
    CHECK(chain.deny(2, 3) == 0.3);
    CHECK(chain.deny(2, 4) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(chain.deny(3, 3) == 0.5);
    CHECK(chain.deny(3, 4) == doctest::Approx(0.5).epsilon(1e-12));

    // Admitting recovers by epsilon; overshoot folds into level 1, and the
    // never-admitted level jumps straight to fresh.
    CHECK(chain.admit(0, 1) == 1.0);
    CHECK(chain.admit(1, 1) == 1.0);
    CHECK(chain.admit(2, 2) == 0.6);
    CHECK(chain.admit(2, 1) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(chain.admit(3, 3) == 0.6);
    CHECK(chain.admit(3, 2) == 0.4);
    CHECK(chain.admit(3, 1) == doctest::Approx(0.0).epsilon(1e-12));

    // Suspension is absorbing under both decisions.
    for (int j = 0; j < 5; ++j) {
        CHECK(chain.deny(4, j) == (j == 4 ? 1.0 : 0.0));
        CHECK(chain.admit(4, j) == (j == 4 ? 1.0 : 0.0));
    }

    auto broken = chain;
    broken.deny(4, 4) = 0.5;
    broken.deny(4, 0) = 0.5;
    CHECK_THROWS_AS(broken.validate(), validation_error);
}

TEST_CASE("urgency levels decay while denied and clear on admission") {
    InelasticStateSpec spec;
    spec.persistence_levels = 1;
    spec.urgency_levels = 2;
    spec.stale_probs = {1.0};
    spec.recover_probs = {1.0};
    spec.decay_probs = {0.7, 0.3};
    const auto chain = build_level_chain(spec);
    REQUIRE(chain.level_count() == 5); // slots: -2 -1 0 1 suspension

    CHECK(chain.deny(2, 2) == 0.7); // level 0 stays
    CHECK(chain.deny(2, 1) == 0.3); // or deepens one step
    CHECK(chain.deny(1, 1) == 0.7);
    CHECK(chain.deny(1, 0) == 0.3);
    CHECK(chain.deny(0, 0) == 0.7); // decay past -D_u suspends
    CHECK(chain.deny(0, 4) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(chain.deny(3, 3) == 1.0); // admitted set stays fresh under pi
    for (int slot = 0; slot <= 2; ++slot)
        CHECK(chain.admit(slot, 3) == 1.0); // admission jumps to level 1
    CHECK(chain.admit(3, 3) == 1.0);
}

TEST_CASE("a deterministic countdown suspends after D_u denials") {
    InelasticStateSpec spec;
    spec.persistence_levels = 1;
    spec.urgency_levels = 4;
    spec.stale_probs = {0.0, 1.0};
    spec.recover_probs = {1.0};
    spec.decay_probs = {0.0, 1.0};
    const auto chain = build_level_chain(spec);
    REQUIRE(chain.level_count() == 7); // slots: -4..0, 1, suspension

    std::vector<double> f(7, 0.0);
    f[4] = 1.0; // level 0
    for (int denial = 1; denial <= 4; ++denial) {
        f = step_levels(f, chain.deny);
        CHECK(f[static_cast<std::size_t>(4 - denial)] == 1.0);
    }
    f = step_levels(f, chain.deny);
    CHECK(f[6] == 1.0); // the fifth denial lands in suspension

    // One admission from any live urgency level resets the countdown.
    std::vector<double> g(7, 0.0);
    g[1] = 1.0;
    g = step_levels(g, chain.admit);
    CHECK(g[5] == 1.0);
}

TEST_CASE("random level chains are stochastic") {
    std::mt19937_64 rng(314159u);
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    auto sequence = [&](int len) {
        std::vector<double> seq(static_cast<std::size_t>(len));
        double total = 0.0;
        for (auto &v : seq)
            total += (v = unit(rng));
        for (auto &v : seq)
            v /= total;
        return seq;
    };
    for (int trial = 0; trial < 25; ++trial) {
        InelasticStateSpec spec;
        spec.persistence_levels = 1 + static_cast<int>(rng() % 4);
        spec.urgency_levels = static_cast<int>(rng() % 4);
        spec.stale_probs = sequence(1 + static_cast<int>(rng() % 4));
        spec.recover_probs = sequence(1 + static_cast<int>(rng() % 3));
        spec.decay_probs = sequence(1 + static_cast<int>(rng() % 3));
        const auto chain = build_level_chain(spec);
        CHECK_NOTHROW(chain.validate());
        const int d = chain.level_count();
        for (const auto *m : {&chain.deny, &chain.admit}) {
            for (int i = 0; i < d; ++i) {
                double row = 0.0;
                for (int j = 0; j < d; ++j) {
                    CHECK((*m)(i, j) >= 0.0);
                    row += (*m)(i, j);
                }
                CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
            }
            CHECK((*m)(d - 1, d - 1) == 1.0);
        }
    }
}

TEST_CASE("the composite control space crosses admission with the step choice") {
    const std::vector<InelasticFlowSpec> stateless_flows{{2.5, 25.0, false}};
    const auto stateless = build_control_space(stateless_flows, 200.0);
    const auto space = build_composite_control_space(stateless, 75.0, 25.0);
    REQUIRE(space.action_count() == 4);
    CHECK(space.composite);
    CHECK(space.stateless_count == 2);
    CHECK_FALSE(space.calibrated);

    const std::vector<double> loads{0.0, 2.5, 75.0, 77.5};
    const std::vector<double> rewards{0.0, 25.0, 25.0, 50.0};
    const std::vector<bool> admits{false, false, true, true};
    const std::vector<int> partner{0, 1, 0, 1};
    for (int a = 0; a < 4; ++a) {
        CHECK(space.actions[static_cast<std::size_t>(a)].load == loads[static_cast<std::size_t>(a)]);
        CHECK(space.actions[static_cast<std::size_t>(a)].inelastic_reward_rate ==
              rewards[static_cast<std::size_t>(a)]);
        CHECK(space.actions[static_cast<std::size_t>(a)].admits_stateful ==
              admits[static_cast<std::size_t>(a)]);
        CHECK(space.actions[static_cast<std::size_t>(a)].stateless_index ==
              partner[static_cast<std::size_t>(a)]);
    }
    CHECK(space.actions[3].member_flows == std::vector<int>{0});

    // An exact (load, reward) tie orders deny before admit.
    const std::vector<InelasticFlowSpec> twin{{5.0, 1.0, false}};
    const auto tied = build_composite_control_space(build_control_space(twin, 20.0), 5.0, 1.0);
    REQUIRE(tied.action_count() == 4);
    CHECK(tied.actions[1].load == 5.0);
    CHECK(tied.actions[2].load == 5.0);
    CHECK_FALSE(tied.actions[1].admits_stateful);
    CHECK(tied.actions[2].admits_stateful);

    CHECK_THROWS_AS(build_composite_control_space(space, 1.0, 1.0), validation_error);
    CHECK_THROWS_AS(build_composite_control_space(stateless, 198.0, 1.0), validation_error);
    CHECK_THROWS_AS(build_composite_control_space(ControlSpace{}, 1.0, 1.0), validation_error);
    const auto calibrated =
        calibrate_rewards(stateless, ElasticRewardSpec::constant(1.0), 1800.0);
    CHECK_THROWS_AS(build_composite_control_space(calibrated, 75.0, 25.0), validation_error);
}

TEST_CASE("augmentation crosses level motion with step motion") {
    const auto file = load_scenario_file(scenario_path("three_action_stateful.json"));
    const auto bundle = build_model(file);
    const auto &aug = bundle.model;
    REQUIRE(bundle.chain.has_value());
    CHECK(aug.levels == 3);
    CHECK(aug.urgency_levels == 0);
    CHECK(aug.state_count() == 30603);
    CHECK(aug.initial_state() == 0);
    CHECK(aug.action_count() == 4);
    CHECK_NOTHROW(aug.validate());

    // Rebuild the unaugmented base over the same composite control space.
    const auto dists = action_step_distributions(bundle.control, file.disc);
    const auto base = assemble_model(file.scenario, file.disc, bundle.control, dists);
    REQUIRE(base.levels == 1);

    // Away from suspension every action earns its composite rate; suspended
    // admitting actions fall back to their deny partner's rate.
    const int susp = bundle.chain->suspension_slot();
    for (int a = 0; a < 4; ++a) {
        const auto &action = bundle.control.actions[static_cast<std::size_t>(a)];
        for (int w = 0; w < susp; ++w)
            CHECK(aug.inelastic_rate[static_cast<std::size_t>(a)][static_cast<std::size_t>(w)] ==
                  base.inelastic_rate[static_cast<std::size_t>(a)][0]);
        const double suspended =
            aug.inelastic_rate[static_cast<std::size_t>(a)][static_cast<std::size_t>(susp)];
        if (action.admits_stateful) {
            std::size_t partner = 4;
            for (std::size_t b = 0; b < 4; ++b)
                if (!bundle.control.actions[b].admits_stateful &&
                    bundle.control.actions[b].stateless_index == action.stateless_index)
                    partner = b;
            REQUIRE(partner < 4);
            CHECK(suspended == base.inelastic_rate[partner][0]);
        } else {
            CHECK(suspended == base.inelastic_rate[static_cast<std::size_t>(a)][0]);
        }
    }

    // Transition blocks factor into level motion times step motion.
    const int width = file.disc.steps + 1;
    std::mt19937_64 rng(5u);
    for (int sample = 0; sample < 200; ++sample) {
        const int a = static_cast<int>(rng() % 4);
        const int w = static_cast<int>(rng() % 3);
        const int wp = static_cast<int>(rng() % 3);
        const int x = static_cast<int>(rng() % width);
        const int xp = static_cast<int>(rng() % width);
        const auto &lvl = bundle.control.actions[static_cast<std::size_t>(a)].admits_stateful
                              ? bundle.chain->admit
                              : bundle.chain->deny;
        const double want = lvl(w, wp) * base.step_blocks[static_cast<std::size_t>(a)](x, xp);
        CHECK(aug.step_blocks[static_cast<std::size_t>(a)](w * width + x, wp * width + xp) ==
              want);
    }

    CHECK_THROWS_AS(augment_model(aug, *bundle.chain), validation_error);
    try {
        augment_model(base, *bundle.chain, 1024);
        FAIL("capacity cap not enforced");
    } catch (const capacity_error &e) {
        CHECK(std::string(e.what()).find("bytes") != std::string::npos);
    }
}

TEST_CASE("a never-staling chain reproduces the unaugmented values") {
    auto file = load_scenario_file(scenario_path("three_action_stateful.json"));
    REQUIRE(file.stateful.has_value());
    file.stateful->stale_probs = {1.0};
    const auto bundle = build_model(file);
    const auto solved = solve(bundle.model);

    const auto dists = action_step_distributions(bundle.control, file.disc);
    const auto base = assemble_model(file.scenario, file.disc, bundle.control, dists);
    const auto flat = solve(base);

    // Levels 0 and 1 never reach suspension, so their values collapse to the
    // stateless solution.
    for (int w = 0; w <= 1; ++w)
        for (int k = 0; k <= file.disc.stages; ++k)
            for (int x = 0; x <= file.disc.steps; ++x) {
                const auto i = static_cast<std::size_t>(bundle.model.state_of(w, x, k));
                const auto j = static_cast<std::size_t>(base.state_of(0, x, k));
                CHECK(solved.cost.total[i] ==
                      doctest::Approx(flat.cost.total[j]).epsilon(1e-9));
            }
}

TEST_CASE("staleness splits the policy across levels") {
    const auto file = load_scenario_file(scenario_path("three_action_stateful.json"));
    const auto bundle = build_model(file);
    const auto solved = solve(bundle.model);
    int differs = 0;
    for (int k = 0; k < file.disc.stages; ++k)
        for (int x = 0; x <= file.disc.steps; ++x) {
            const auto fresh = solved.policy.actions[static_cast<std::size_t>(
                bundle.model.state_of(0, x, k))];
            const auto admitted = solved.policy.actions[static_cast<std::size_t>(
                bundle.model.state_of(1, x, k))];
            if (fresh != admitted)
                ++differs;
        }
    CHECK(differs > 0);
}

TEST_CASE("small augmented models match the dense reference solver") {
    ScenarioFile file;
    file.scenario.bandwidth = 20.0;
    file.scenario.elastic_size = 1000.0;
    file.scenario.elastic_deadline = 40.0;
    file.scenario.elastic_reward = ElasticRewardSpec::constant(1.0);
    file.scenario.lambda_inelastic = 1.5;
    file.scenario.flows = {{3.0, 1.0, false}, {4.0, 1.5, true}};
    file.disc = Discretization::make(4, 4, 1000.0, 40.0);
    InelasticStateSpec spec;
    spec.persistence_levels = 1;
    spec.urgency_levels = 1;
    spec.stale_probs = {0.5, 0.5};
    spec.recover_probs = {0.8, 0.2};
    spec.decay_probs = {0.6, 0.4};
    file.stateful = spec;

    const auto bundle = build_model(file);
    const auto &m = bundle.model;
    REQUIRE(m.levels == 4);
    REQUIRE(m.urgency_levels == 1);
    CHECK(m.initial_state() == m.state_of(1, 0, 0));

    const auto got = solve(m);
    const auto want = oracle_solve(m);
    CHECK(sup_diff(got.cost.total, want.values) <= 1e-12);

    // The chosen action must be optimal per the reference q-values; exact
    // argmin agreement is not required where q-values tie to the bit.
    for (long i = 0; i < m.state_count(); ++i) {
        double best = want.q(static_cast<int>(i), 0);
        for (int a = 1; a < m.action_count(); ++a)
            best = std::min(best, want.q(static_cast<int>(i), a));
        const int chosen = got.policy.actions[static_cast<std::size_t>(i)];
        CHECK(want.q(static_cast<int>(i), chosen) <= best + 1e-12);
    }
}
