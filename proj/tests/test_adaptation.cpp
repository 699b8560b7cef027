#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "readapt/adaptation.hpp"
#include "readapt/contrastive.hpp"
#include "readapt/dataset.hpp"
#include "readapt/distance.hpp"
#include "readapt/pseudo_label.hpp"
#include "readapt/selection.hpp"

#include "oracles.hpp"

using readapt::FeatureMap;
using readapt::PoolState;

TEST_CASE("cosine distance spans [0, 2]") {
    CHECK(readapt::pairwise_distance({1.0, 0.0}, {0.0, 3.0}) ==
          doctest::Approx(1.0));
    CHECK(readapt::pairwise_distance({2.0, 1.0}, {4.0, 2.0}) ==
          doctest::Approx(0.0));
    CHECK(readapt::pairwise_distance({1.0, 0.0}, {-5.0, 0.0}) ==
          doctest::Approx(2.0));
    CHECK_THROWS_AS(readapt::pairwise_distance({1.0}, {1.0, 2.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(readapt::pairwise_distance({0.0, 0.0}, {1.0, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("three sigma bound on a constructed geometry") {
    // Unit vectors at cosines 0.8, 0.6, 0.4 from j give distances
    // 0.2, 0.4, 0.6.
    FeatureMap f;
    f[7] = {1.0, 0.0};
    f[1] = {0.8, 0.6};
    f[2] = {0.6, 0.8};
    f[3] = {0.4, std::sqrt(0.84)};
    const double b = readapt::distance_upper_bound(7, {1, 2, 3}, f);
    CHECK(b == doctest::Approx(-0.089897948556635619639).epsilon(1e-12));

    // Self belongs to the pool: its zero distance enters the statistics.
    FeatureMap g;
    g[10] = {1.0, 0.0};
    g[11] = {0.5, std::sqrt(0.75)};
    const double b2 = readapt::distance_upper_bound(10, {10, 11}, g);
    CHECK(b2 == doctest::Approx(0.25 - 3.0 * 0.25).epsilon(1e-12));

    CHECK_THROWS_AS(readapt::distance_upper_bound(7, {}, f),
                    std::invalid_argument);
}

TEST_CASE("knn sets rank by distance with id tie-breaks") {
    FeatureMap f;
    auto at_deg = [](double deg) {
        const double r = deg * M_PI / 180.0;
        return std::vector<double>{std::cos(r), std::sin(r)};
    };
    f[10] = at_deg(0);
    f[20] = at_deg(10);
    f[30] = at_deg(25);
    f[40] = at_deg(90);
    const auto nn = readapt::knn_sets({10, 20, 30, 40}, f, 2);
    CHECK(nn.at(10) == std::vector<std::int64_t>{20, 30});
    CHECK(nn.at(40) == std::vector<std::int64_t>{30, 20});
    CHECK(nn.at(20) == std::vector<std::int64_t>{10, 30});

    // k exceeding n-1 truncates.
    const auto all = readapt::knn_sets({10, 20, 30, 40}, f, 9);
    CHECK(all.at(10).size() == 3);

    // Equidistant neighbors resolve by ascending id.
    FeatureMap t;
    t[5] = {1.0, 0.0};
    t[2] = {0.8, 0.6};
    t[9] = {0.8, -0.6};
    const auto tie = readapt::knn_sets({5, 2, 9}, t, 1);
    CHECK(tie.at(5) == std::vector<std::int64_t>{2});

    CHECK_THROWS_AS(readapt::knn_sets({10, 20}, f, 0), std::invalid_argument);
}

TEST_CASE("mutual knn requires membership both ways") {
    std::map<std::int64_t, std::vector<std::int64_t>> nn;
    nn[1] = {2, 3};
    nn[2] = {1};
    nn[3] = {2};
    CHECK(readapt::mutual_knn(1, 2, nn));
    CHECK(readapt::mutual_knn(2, 1, nn));
    CHECK_FALSE(readapt::mutual_knn(1, 3, nn)); // 3 does not list 1
    CHECK_FALSE(readapt::mutual_knn(2, 3, nn));
}

TEST_CASE("pseudo label set on a transparent geometry") {
    // Orthonormal spokes keep every within-pool distance at exactly 1, so
    // each reliability bound is (10 - 3*sqrt(10)) / 11, slightly positive.
    // The probe coincides with source sample 0 and labeled-target sample 11
    // and is mutual-knn with both; everything else sits at distance 1.
    auto axis = [](int a) {
        std::vector<double> v(22, 0.0);
        v[static_cast<std::size_t>(a)] = 1.0;
        return v;
    };
    readapt::PoolState pools;
    FeatureMap f;
    std::map<std::int64_t, int> labels;
    for (int m = 0; m < 11; ++m) {
        f[m] = axis(m);
        pools.source_labeled.insert(m);
        labels[m] = m == 0 ? 0 : 1;
    }
    f[11] = axis(0);
    pools.target_labeled.insert(11);
    labels[11] = 0;
    for (int m = 12; m < 22; ++m) {
        f[m] = axis(m - 1);
        pools.target_labeled.insert(m);
        labels[m] = 1;
    }
    f[22] = axis(0);  // the probe
    f[23] = axis(21); // isolated, no mutual neighbors
    pools.target_unlabeled = {22, 23};

    const readapt::LabelContext ctx =
        readapt::make_label_context(f, labels, pools, 2, 3);
    const double bound = (10.0 - 3.0 * std::sqrt(10.0)) / 11.0;
    CHECK(ctx.bound.at(0) == doctest::Approx(bound).epsilon(1e-12));
    CHECK(ctx.bound.at(11) == doctest::Approx(bound).epsilon(1e-12));

    // One source neighbor of class 0 counts 1, one labeled target counts 2.
    CHECK(readapt::similarity_score(22, 0, ctx) == 3);
    CHECK(readapt::similarity_score(22, 1, ctx) == 0);
    // Mean score 1.5; only class 0 clears it.
    CHECK(readapt::pseudo_label_set(22, ctx) == std::vector<int>{0});

    const auto all = readapt::pseudo_label_all(ctx);
    CHECK(all.size() == 2);
    CHECK(all.at(22) == std::vector<int>{0});
    CHECK(all.at(23).empty());

    CHECK_THROWS_AS(readapt::similarity_score(22, 2, ctx),
                    std::invalid_argument);
    CHECK_THROWS_AS(readapt::make_label_context(f, labels, pools, 1, 3),
                    std::invalid_argument);
}

TEST_CASE("similarity scores and label sets match the brute-force oracle") {
    readapt::RandomStream stream(501);
    for (int trial = 0; trial < 30; ++trial) {
        const oracle::Instance inst = oracle::random_instance(stream);
        const auto nn = oracle::knn(inst);
        const auto bound = oracle::bounds(inst);
        const readapt::LabelContext ctx = readapt::make_label_context(
            inst.features, inst.labels, inst.pools, inst.num_classes, inst.k);
        for (std::int64_t i : inst.pools.target_unlabeled) {
            for (int c = 0; c < inst.num_classes; ++c) {
                CHECK(readapt::similarity_score(i, c, ctx) ==
                      oracle::similarity(i, c, inst, nn, bound));
            }
            CHECK(readapt::pseudo_label_set(i, ctx) ==
                  oracle::pls(i, inst, nn, bound));
        }
    }
}

TEST_CASE("contrastive loss matches the brute-force oracle") {
    readapt::RandomStream stream(502);
    int nonzero = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const oracle::Instance inst = oracle::random_instance(stream);
        std::vector<std::int64_t> batch;
        for (std::int64_t id : inst.pools.source_labeled) batch.push_back(id);
        for (std::int64_t id : inst.pools.target_labeled) batch.push_back(id);
        const std::size_t m = 1 + stream.uniform_below(3);
        readapt::RandomStream sub_stream(600 + trial);
        const readapt::ContrastiveSubsets subsets =
            readapt::draw_contrastive_subsets(batch, inst.labels, inst.pools,
                                              m, sub_stream);
        const readapt::ContrastiveResult got = readapt::contrastive_loss(
            batch, inst.features, inst.labels, inst.pools, subsets, false);
        const double want = oracle::contrastive(inst, batch, subsets);
        CHECK(std::abs(got.loss - want) <=
              1e-12 * std::max(1.0, std::abs(want)));
        nonzero += want != 0.0;
    }
    CHECK(nonzero > 20); // the comparison must exercise real mass
}

TEST_CASE("contrastive feature gradients match finite differences") {
    readapt::RandomStream stream(503);
    const oracle::Instance inst = oracle::random_instance(stream);
    std::vector<std::int64_t> batch;
    for (std::int64_t id : inst.pools.source_labeled) batch.push_back(id);
    for (std::int64_t id : inst.pools.target_labeled) batch.push_back(id);
    readapt::RandomStream sub_stream(42);
    const readapt::ContrastiveSubsets subsets = readapt::draw_contrastive_subsets(
        batch, inst.labels, inst.pools, 2, sub_stream);
    const readapt::ContrastiveResult res = readapt::contrastive_loss(
        batch, inst.features, inst.labels, inst.pools, subsets, true);
    CHECK_FALSE(res.feature_grads.empty());
    for (const auto& [id, grad] : res.feature_grads) {
        for (std::size_t d = 0; d < grad.size(); ++d) {
            FeatureMap bumped = inst.features;
            const double h = 1e-6;
            bumped[id][d] += h;
            const double up =
                readapt::contrastive_loss(batch, bumped, inst.labels,
                                          inst.pools, subsets, false)
                    .loss;
            bumped[id][d] -= 2 * h;
            const double down =
                readapt::contrastive_loss(batch, bumped, inst.labels,
                                          inst.pools, subsets, false)
                    .loss;
            const double fd = (up - down) / (2 * h);
            CHECK(std::abs(fd - grad[d]) <=
                  1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("contrastive subset draws stay inside the class pools") {
    readapt::RandomStream stream(504);
    const oracle::Instance inst = oracle::random_instance(stream);
    std::vector<std::int64_t> batch;
    for (std::int64_t id : inst.pools.source_labeled) batch.push_back(id);
    for (std::int64_t id : inst.pools.target_labeled) batch.push_back(id);

    readapt::RandomStream s1(7), s2(7), s3(8);
    const auto a = readapt::draw_contrastive_subsets(batch, inst.labels,
                                                     inst.pools, 2, s1);
    const auto b = readapt::draw_contrastive_subsets(batch, inst.labels,
                                                     inst.pools, 2, s2);
    CHECK(a.from_source == b.from_source);
    CHECK(a.from_target == b.from_target);

    for (std::int64_t i : batch) {
        const int y = inst.labels.at(i);
        std::size_t class_in_source = 0, class_in_target = 0;
        for (std::int64_t j : inst.pools.source_labeled) {
            class_in_source += inst.labels.at(j) == y;
        }
        for (std::int64_t j : inst.pools.target_labeled) {
            class_in_target += inst.labels.at(j) == y;
        }
        CHECK(a.from_source.at(i).size() == std::min<std::size_t>(2, class_in_source));
        CHECK(a.from_target.at(i).size() == std::min<std::size_t>(2, class_in_target));
        for (std::int64_t j : a.from_source.at(i)) {
            CHECK(inst.pools.source_labeled.count(j) == 1);
            CHECK(inst.labels.at(j) == y);
        }
        for (std::int64_t j : a.from_target.at(i)) {
            CHECK(inst.pools.target_labeled.count(j) == 1);
            CHECK(inst.labels.at(j) == y);
        }
    }

    // Unlabeled ids cannot participate.
    std::vector<std::int64_t> bad = batch;
    bad.push_back(*inst.pools.target_unlabeled.begin());
    CHECK_THROWS_AS(readapt::draw_contrastive_subsets(bad, inst.labels,
                                                      inst.pools, 2, s3),
                    std::invalid_argument);
}

TEST_CASE("candidate selection and diversity filter match the oracle") {
    readapt::RandomStream stream(505);
    for (int trial = 0; trial < 30; ++trial) {
        const oracle::Instance inst = oracle::random_instance(stream);
        std::vector<readapt::ScoredSample> scores;
        for (std::int64_t id : inst.all_ids) {
            readapt::ScoredSample s;
            s.id = id;
            s.score.u_total = stream.uniform();
            if (stream.uniform_below(4) == 0 && !scores.empty()) {
                s.score.u_total = scores.back().score.u_total; // forced ties
            }
            scores.push_back(s);
        }
        readapt::SelectionRound round;
        round.round_index = 1 + static_cast<int>(stream.uniform_below(5));
        round.budget = 1 + stream.uniform_below(3);
        const auto cands = readapt::select_candidates(scores, round);
        CHECK(cands == oracle::candidates(scores, round));

        const std::size_t budget =
            std::min<std::size_t>(round.budget, cands.size());
        const auto picked =
            readapt::diversity_filter(cands, inst.features, scores, budget);
        CHECK(picked ==
              oracle::diversity(cands, inst.features, scores, budget));
    }
}

TEST_CASE("selection edge cases") {
    std::vector<readapt::ScoredSample> scores(3);
    scores[0].id = 4;
    scores[1].id = 2;
    scores[2].id = 9;
    for (auto& s : scores) s.score.u_total = 1.0; // all tied

    readapt::SelectionRound round;
    round.round_index = 1;
    round.budget = 1;
    CHECK(round.candidate_multiplier() == 2);
    // Ties resolve by ascending id.
    CHECK(readapt::select_candidates(scores, round) ==
          std::vector<std::int64_t>{2, 4});

    round.budget = 5; // 2*5 exceeds the pool: clamp
    CHECK(readapt::select_candidates(scores, round).size() == 3);

    CHECK_THROWS_AS(readapt::select_candidates({}, round),
                    std::invalid_argument);
    round.budget = 0;
    CHECK_THROWS_AS(readapt::select_candidates(scores, round),
                    std::invalid_argument);

    FeatureMap f;
    f[2] = {1.0, 0.0};
    f[4] = {0.0, 1.0};
    f[9] = {1.0, 1.0};
    // budget == candidate count: pass-through, no scoring needed
    CHECK(readapt::diversity_filter({9, 2}, f, scores, 2) ==
          std::vector<std::int64_t>{9, 2});
    CHECK_THROWS_AS(readapt::diversity_filter({2, 4}, f, scores, 3),
                    std::invalid_argument);
    // Degenerate spans: every gain equals 0.5 * (1 + 0.5), ids decide.
    CHECK(readapt::diversity_filter({9, 2, 4}, f, scores, 2) ==
          std::vector<std::int64_t>{2, 4});
}

TEST_CASE("pool bookkeeping enforces the partition") {
    PoolState pools;
    pools.source_labeled = {1, 2};
    pools.target_unlabeled = {3, 4};
    pools.validate();
    pools.mark_labeled(3);
    CHECK(pools.target_labeled.count(3) == 1);
    CHECK(pools.target_unlabeled.count(3) == 0);
    CHECK_THROWS_AS(pools.mark_labeled(3), std::logic_error);
    pools.target_unlabeled.insert(2);
    CHECK_THROWS_AS(pools.validate(), std::logic_error);
}

namespace {

readapt::DomainSpec tiny_spec(std::uint64_t seed) {
    readapt::DomainSpec spec;
    spec.num_classes = 3;
    spec.d_in = 4;
    spec.per_class_per_domain = 8;
    spec.radius = 2.0;
    spec.sigma = 0.3;
    spec.shift.rotation_deg = 25.0;
    spec.shift.scale = 1.2;
    spec.shift.sigma_ratio = 1.5;
    spec.seed = seed;
    return spec;
}

readapt::AdaConfig tiny_config(std::uint64_t seed) {
    readapt::AdaConfig cfg;
    cfg.hidden = 8;
    cfg.d_feat = 6;
    cfg.rounds = 2;
    cfg.budget_fraction = 0.2;
    cfg.per_round_fraction = 0.1;
    cfg.pretrain_epochs = 4;
    cfg.round_epochs = 2;
    cfg.batch = 8;
    cfg.k = 3;
    cfg.contrastive_subset = 3;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("session budgets follow the rounding contract") {
    const readapt::DatasetBundle bundle = readapt::generate(tiny_spec(11));
    // 3 classes x 8 per class, 75/25 split: 18 target training samples.
    readapt::AdaConfig cfg = tiny_config(11);
    readapt::AdaSession session(bundle, cfg);
    // Budget: round(0.2 * 18) = 4 over 2 rounds: 2 + 2.
    CHECK(session.round_budgets() == std::vector<std::size_t>{2, 2});

    cfg.rounds = 3;
    cfg.per_round_fraction = 0.1;
    cfg.budget_fraction = 0.3; // round(5.4) = 5 over 3 rounds: 2+2+1
    readapt::AdaSession session2(bundle, cfg);
    CHECK(session2.round_budgets() == std::vector<std::size_t>{2, 2, 1});
}

TEST_CASE("session enforces the phase order") {
    const readapt::DatasetBundle bundle = readapt::generate(tiny_spec(12));
    readapt::AdaSession session(bundle, tiny_config(12));
    CHECK_THROWS_AS(session.run_round(1), std::logic_error);
    CHECK_THROWS_AS(session.finish(), std::logic_error);
    session.pretrain();
    CHECK_THROWS_AS(session.pretrain(), std::logic_error);
    CHECK_THROWS_AS(session.run_round(2), std::logic_error);
    const readapt::RoundReport r1 = session.run_round(1);
    CHECK(r1.round_index == 1);
    CHECK(r1.selected_ids.size() == r1.budget);
    CHECK(r1.labeled_target_size == r1.budget);
    CHECK_THROWS_AS(session.run_round(1), std::logic_error);
    CHECK_THROWS_AS(session.run_round(3), std::logic_error);
    session.run_round(2);
    const readapt::RunResult result = session.finish();
    CHECK(result.rounds.size() == 2);
    CHECK(result.summary.labeled_target_final == 4);
    CHECK(result.summary.budget_total == 4);
}

TEST_CASE("full runs are deterministic and strategy-sensitive") {
    const readapt::DatasetBundle bundle = readapt::generate(tiny_spec(13));
    const readapt::AdaConfig cfg = tiny_config(13);
    const readapt::RunResult a = readapt::run_ada(bundle, cfg);
    const readapt::RunResult b = readapt::run_ada(bundle, cfg);
    CHECK(a.model.params == b.model.params);
    CHECK(a.model.s == b.model.s);
    CHECK(a.optimizer_step == b.optimizer_step);
    REQUIRE(a.rounds.size() == b.rounds.size());
    for (std::size_t r = 0; r < a.rounds.size(); ++r) {
        CHECK(a.rounds[r].selected_ids == b.rounds[r].selected_ids);
        CHECK(a.rounds[r].epoch_loss == b.rounds[r].epoch_loss);
    }
    CHECK(a.summary.target_test_after.accuracy ==
          b.summary.target_test_after.accuracy);

    readapt::AdaConfig random_cfg = cfg;
    random_cfg.strategy = readapt::Strategy::random;
    const readapt::RunResult c = readapt::run_ada(bundle, random_cfg);
    std::set<std::int64_t> picked_a, picked_c;
    for (const auto& r : a.rounds) {
        picked_a.insert(r.selected_ids.begin(), r.selected_ids.end());
    }
    for (const auto& r : c.rounds) {
        picked_c.insert(r.selected_ids.begin(), r.selected_ids.end());
    }
    CHECK(picked_a != picked_c);
    CHECK(c.summary.strategy == "random");

    // Selected ids always come out of the unlabeled target pool.
    for (const auto& r : a.rounds) {
        for (std::int64_t id : r.selected_ids) {
            bool in_target_train = false;
            for (const auto& s : bundle.samples) {
                if (s.id == id) {
                    in_target_train = s.domain == readapt::Domain::target &&
                                      s.split == readapt::Split::train;
                }
            }
            CHECK(in_target_train);
        }
    }
}

TEST_CASE("strategy names round trip") {
    CHECK(readapt::strategy_from_string("renyi") == readapt::Strategy::renyi);
    CHECK(readapt::strategy_from_string("shannon") ==
          readapt::Strategy::shannon);
    CHECK(readapt::strategy_from_string("random") ==
          readapt::Strategy::random);
    CHECK(readapt::strategy_name(readapt::Strategy::shannon) == "shannon");
    CHECK_THROWS_AS(readapt::strategy_from_string("greedy"),
                    std::invalid_argument);
}
