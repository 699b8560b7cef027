#include "readapt/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "readapt/contrastive.hpp"
#include "readapt/dirichlet.hpp"
#include "readapt/entropy.hpp"
#include "readapt/mc.hpp"
#include "readapt/model.hpp"
#include "readapt/pool.hpp"
#include "readapt/pseudo_label.hpp"
#include "readapt/rng.hpp"
#include "readapt/selection.hpp"
#include "readapt/training.hpp"

namespace readapt {

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(3);
    out << v;
    return out.str();
}

SuiteResult mc_agreement(const SelftestOptions& opt) {
    const int pairs = opt.deep ? 100 : 30;
    const std::uint64_t draws = opt.deep ? 1000000 : 20000;
    RandomStream stream(derive_seed(opt.seed, "selftest_mc"));
    int within = 0;
    double worst = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const std::size_t c = 2 + stream.uniform_below(10);
        std::vector<double> alpha(c);
        for (double& a : alpha) a = 0.1 + 49.9 * stream.uniform();
        const RenyiOrder order(0.1 + 0.8 * stream.uniform());
        const DirichletParams d(alpha);
        const double closed = u_pred(d, order);
        const McEstimate est = mc_conditional_entropy(
            d, order, draws,
            derive_seed(opt.seed, "selftest_mc_" + std::to_string(i)));
        const double gap = std::abs(est.estimate - closed);
        const double in_se =
            est.std_error > 0.0 ? gap / est.std_error
                                : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        worst = std::max(worst, in_se);
        if (in_se <= 3.0) ++within;
    }
    const int need = pairs - std::max(1, pairs / 33);
    SuiteResult r;
    r.name = "closed form vs monte carlo";
    r.passed = within >= need;
    r.detail = std::to_string(within) + "/" + std::to_string(pairs) +
               " pairs within 3 SE at n=" + std::to_string(draws) +
               " (worst " + fmt(worst) + " SE)";
    return r;
}

SuiteResult non_negativity(const SelftestOptions& opt) {
    const int draws = opt.deep ? 10000 : 2000;
    const bool flip = opt.inject == "udom-sign";
    RandomStream stream(derive_seed(opt.seed, "selftest_sign"));
    reset_u_dom_clamp_count();
    const double log_lo = std::log(1e-3);
    const double log_hi = std::log(1e3);
    double min_seen = std::numeric_limits<double>::infinity();
    int bad = 0;
    std::string first_error;
    for (int i = 0; i < draws; ++i) {
        const std::size_t c = 2 + stream.uniform_below(10);
        std::vector<double> alpha(c);
        for (double& a : alpha) {
            a = std::exp(log_lo + (log_hi - log_lo) * stream.uniform());
        }
        const RenyiOrder order(0.01 + 0.98 * stream.uniform());
        try {
            double u = u_dom(DirichletParams(alpha), order);
            if (flip) u = -u;
            min_seen = std::min(min_seen, u);
            if (!(u >= -1e-8)) ++bad;
        } catch (const std::exception& e) {
            ++bad;
            if (first_error.empty()) first_error = e.what();
        }
    }
    SuiteResult r;
    r.name = "domain uncertainty non-negativity";
    r.passed = bad == 0;
    if (r.passed) {
        r.detail = std::to_string(draws) + " draws, min u_dom " +
                   fmt(min_seen) + ", clamped in [-1e-8,0): " +
                   std::to_string(u_dom_clamp_count());
    } else {
        r.detail = std::to_string(bad) + "/" + std::to_string(draws) +
                   " draws violated u_dom >= -1e-8 (min " + fmt(min_seen) +
                   ")";
        if (!first_error.empty()) r.detail += "; first error: " + first_error;
    }
    return r;
}

SuiteResult entropy_relations(const SelftestOptions& opt) {
    const int cases = opt.deep ? 200 : 60;
    RandomStream stream(derive_seed(opt.seed, "selftest_entropy"));
    int limit_bad = 0, dominance_bad = 0, monotone_bad = 0;
    double worst_limit_gap = 0.0;
    for (int i = 0; i < cases; ++i) {
        const std::size_t c = 2 + stream.uniform_below(7);
        const ProbVector p(stream.dirichlet(std::vector<double>(c, 1.0)));
        const double shannon = shannon_entropy(p);
        const double near_one = renyi_entropy(p, RenyiOrder(0.999));
        worst_limit_gap = std::max(worst_limit_gap,
                                   std::abs(near_one - shannon));
        if (std::abs(near_one - shannon) > 1e-3) ++limit_bad;
        double prev = std::numeric_limits<double>::infinity();
        for (int step = 1; step <= 9; ++step) {
            const double value = renyi_entropy(p, RenyiOrder(0.1 * step));
            if (value < shannon - 1e-12) ++dominance_bad;
            if (value > prev + 1e-12) ++monotone_bad;
            prev = value;
        }
    }
    SuiteResult r;
    r.name = "entropy order relations";
    r.passed = limit_bad == 0 && dominance_bad == 0 && monotone_bad == 0;
    if (r.passed) {
        r.detail = std::to_string(cases) +
                   " distributions; worst Shannon-limit gap " +
                   fmt(worst_limit_gap);
    } else {
        r.detail = "violations: limit " + std::to_string(limit_bad) +
                   ", dominance " + std::to_string(dominance_bad) +
                   ", monotonicity " + std::to_string(monotone_bad);
    }
    return r;
}

struct FdInstance {
    TrainingData data;
    PoolState pools;
    TrainingBatch batch;
};

FdInstance make_fd_instance(const ModelDims& dims, RandomStream& stream) {
    FdInstance inst;
    for (std::int64_t id = 0; id < 13; ++id) {
        std::vector<double> x(dims.d_in);
        for (double& v : x) v = 1.5 * stream.normal();
        inst.data.inputs[id] = x;
        if (id < 6) {
            inst.pools.source_labeled.insert(id);
            inst.data.labels[id] = static_cast<int>(id % 3);
        } else if (id < 9) {
            inst.pools.target_labeled.insert(id);
            inst.data.labels[id] = static_cast<int>(id % 3);
        } else {
            inst.pools.target_unlabeled.insert(id);
        }
    }
    inst.data.pls[9] = {0};
    inst.data.pls[10] = {1, 2};
    inst.data.pls[11] = {};
    inst.data.pls[12] = {};
    inst.batch.edl_ids = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    inst.batch.align_ids = {9, 10, 11, 12};
    inst.batch.contrastive_ids = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    inst.batch.subsets = draw_contrastive_subsets(
        inst.batch.contrastive_ids, inst.data.labels, inst.pools, 2, stream);
    return inst;
}

SuiteResult gradient_check(const SelftestOptions& opt) {
    const int models = opt.deep ? 8 : 3;
    RandomStream stream(derive_seed(opt.seed, "selftest_fd"));
    const LossConfig cfg;
    double worst_rel = 0.0;
    std::size_t checked = 0;
    int bad = 0;
    std::string failure;
    for (int i = 0; i < models && failure.empty(); ++i) {
        const ModelDims dims{3, 4, 3, 3};
        EvidentialModel m = init_model(
            dims, derive_seed(opt.seed, "selftest_fd_" + std::to_string(i)));
        m.s = 0.3 + 0.4 * stream.uniform();
        const FdInstance inst = make_fd_instance(dims, stream);
        try {
            const BackwardResult br =
                backward(m, inst.data, inst.pools, inst.batch, cfg);
            auto loss_at = [&](EvidentialModel& probe) {
                return compute_loss(probe, inst.data, inst.pools, inst.batch,
                                    cfg)
                    .total;
            };
            auto compare = [&](double analytic, double plus, double minus,
                               double h) {
                const double fd = (plus - minus) / (2.0 * h);
                if (std::abs(analytic) <= 1e-8) return;
                ++checked;
                const double rel = std::abs(fd - analytic) /
                                   std::max(std::abs(fd), std::abs(analytic));
                worst_rel = std::max(worst_rel, rel);
                if (rel > 1e-4) ++bad;
            };
            EvidentialModel probe = m;
            for (std::size_t j = 0; j < m.params.size(); ++j) {
                const double h = 1e-5 * std::max(1.0, std::abs(m.params[j]));
                probe.params[j] = m.params[j] + h;
                const double up = loss_at(probe);
                probe.params[j] = m.params[j] - h;
                const double down = loss_at(probe);
                probe.params[j] = m.params[j];
                compare(br.grads.params[j], up, down, h);
            }
            const double hs = 1e-5;
            probe.s = m.s + hs;
            const double up = loss_at(probe);
            probe.s = m.s - hs;
            const double down = loss_at(probe);
            probe.s = m.s;
            compare(br.grads.s, up, down, hs);
        } catch (const std::exception& e) {
            failure = e.what();
        }
    }
    SuiteResult r;
    r.name = "analytic gradients vs finite differences";
    r.passed = failure.empty() && bad == 0;
    if (!failure.empty()) {
        r.detail = "exception: " + failure;
    } else if (r.passed) {
        r.detail = std::to_string(models) + " models, " +
                   std::to_string(checked) + " components, worst rel err " +
                   fmt(worst_rel);
    } else {
        r.detail = std::to_string(bad) + " components beyond 1e-4 rel (worst " +
                   fmt(worst_rel) + ")";
    }
    return r;
}

// Brute-force reimplementations used only for cross-checking. Everything
// below recomputes from first principles with plain loops.

double raw_cosine_distance(const std::vector<double>& a,
                           const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

struct OracleInstance {
    FeatureMap features;
    std::map<std::int64_t, int> labels;
    PoolState pools;
    std::vector<std::int64_t> all_ids;
    int num_classes = 2;
    std::size_t k = 1;
};

OracleInstance random_oracle_instance(RandomStream& stream) {
    OracleInstance inst;
    inst.num_classes = 2 + static_cast<int>(stream.uniform_below(3));
    inst.k = 1 + stream.uniform_below(4);
    const std::size_t n = 6 + stream.uniform_below(5);
    std::set<std::int64_t> ids;
    while (ids.size() < n) {
        ids.insert(static_cast<std::int64_t>(stream.uniform_below(97)));
    }
    std::size_t slot = 0;
    for (std::int64_t id : ids) {
        const std::size_t which = slot < 3 ? slot : stream.uniform_below(3);
        ++slot;
        if (which == 0) {
            inst.pools.source_labeled.insert(id);
        } else if (which == 1) {
            inst.pools.target_labeled.insert(id);
        } else {
            inst.pools.target_unlabeled.insert(id);
        }
        std::vector<double> f(3);
        for (double& v : f) v = stream.normal();
        inst.features[id] = f;
        inst.all_ids.push_back(id);
    }
    for (std::int64_t id : inst.pools.source_labeled) {
        inst.labels[id] =
            static_cast<int>(stream.uniform_below(inst.num_classes));
    }
    for (std::int64_t id : inst.pools.target_labeled) {
        inst.labels[id] =
            static_cast<int>(stream.uniform_below(inst.num_classes));
    }
    return inst;
}

std::map<std::int64_t, std::set<std::int64_t>> oracle_knn(
    const OracleInstance& inst) {
    std::map<std::int64_t, std::set<std::int64_t>> out;
    for (std::int64_t i : inst.all_ids) {
        std::vector<std::pair<double, std::int64_t>> order;
        for (std::int64_t j : inst.all_ids) {
            if (j == i) continue;
            order.emplace_back(
                raw_cosine_distance(inst.features.at(i), inst.features.at(j)),
                j);
        }
        std::sort(order.begin(), order.end());
        const std::size_t take = std::min(inst.k, order.size());
        for (std::size_t t = 0; t < take; ++t) {
            out[i].insert(order[t].second);
        }
    }
    return out;
}

std::map<std::int64_t, double> oracle_bounds(const OracleInstance& inst) {
    std::map<std::int64_t, double> out;
    auto bound_over = [&](std::int64_t j, const std::set<std::int64_t>& pool) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::int64_t member : pool) {
            const double d =
                member == j ? 0.0
                            : raw_cosine_distance(inst.features.at(j),
                                                  inst.features.at(member));
            sum += d;
            sum_sq += d * d;
        }
        const double n = static_cast<double>(pool.size());
        const double mean = sum / n;
        const double var = std::max(0.0, sum_sq / n - mean * mean);
        return mean - 3.0 * std::sqrt(var);
    };
    for (std::int64_t j : inst.pools.source_labeled) {
        out[j] = bound_over(j, inst.pools.source_labeled);
    }
    for (std::int64_t j : inst.pools.target_labeled) {
        out[j] = bound_over(j, inst.pools.target_labeled);
    }
    return out;
}

int oracle_similarity(
    std::int64_t i, int c, const OracleInstance& inst,
    const std::map<std::int64_t, std::set<std::int64_t>>& knn,
    const std::map<std::int64_t, double>& bounds) {
    int score = 0;
    auto reliable = [&](std::int64_t j) {
        if (!knn.at(i).count(j) || !knn.at(j).count(i)) return false;
        const double d =
            raw_cosine_distance(inst.features.at(i), inst.features.at(j));
        return d < bounds.at(j);
    };
    for (std::int64_t j : inst.pools.source_labeled) {
        if (inst.labels.at(j) == c && reliable(j)) score += 1;
    }
    for (std::int64_t j : inst.pools.target_labeled) {
        if (inst.labels.at(j) == c && reliable(j)) score += 2;
    }
    return score;
}

double oracle_contrastive(const OracleInstance& inst,
                          const std::vector<std::int64_t>& batch_ids,
                          const ContrastiveSubsets& subsets) {
    auto mass = [&](std::int64_t i, const std::vector<std::int64_t>& js) {
        double acc = 0.0;
        for (std::int64_t j : js) {
            if (j == i) continue;
            acc += raw_cosine_distance(inst.features.at(i),
                                       inst.features.at(j));
        }
        return acc;
    };
    const std::vector<std::int64_t> source(inst.pools.source_labeled.begin(),
                                           inst.pools.source_labeled.end());
    const std::vector<std::int64_t> target(inst.pools.target_labeled.begin(),
                                           inst.pools.target_labeled.end());
    std::size_t n_target = 0;
    for (std::int64_t i : batch_ids) {
        if (inst.pools.target_labeled.count(i)) ++n_target;
    }
    double loss = 0.0;
    for (std::int64_t i : batch_ids) {
        if (!source.empty()) {
            const double den = mass(i, source);
            if (den != 0.0) {
                loss += mass(i, subsets.from_source.at(i)) / den /
                        static_cast<double>(batch_ids.size());
            }
        }
        if (!target.empty()) {
            const double den = mass(i, target);
            if (den != 0.0) {
                loss += mass(i, subsets.from_target.at(i)) / den /
                        static_cast<double>(batch_ids.size());
            }
        }
        if (inst.pools.target_labeled.count(i)) {
            const auto& sub = subsets.from_source.at(i);
            if (!sub.empty()) {
                loss += mass(i, sub) /
                        static_cast<double>(sub.size()) /
                        static_cast<double>(n_target);
            }
        }
    }
    return loss;
}

std::vector<std::int64_t> oracle_candidates(
    const std::vector<ScoredSample>& scores, const SelectionRound& round) {
    std::vector<std::pair<double, std::int64_t>> order;
    for (const ScoredSample& s : scores) {
        order.emplace_back(-s.score.u_total, s.id);
    }
    std::sort(order.begin(), order.end());
    const std::size_t take =
        std::min((static_cast<std::size_t>(round.round_index) + 1) *
                     round.budget,
                 order.size());
    std::vector<std::int64_t> out;
    for (std::size_t t = 0; t < take; ++t) out.push_back(order[t].second);
    return out;
}

std::vector<std::int64_t> oracle_diversity(
    const std::vector<std::int64_t>& candidates, const FeatureMap& features,
    const std::vector<ScoredSample>& scores, std::size_t budget) {
    if (budget == candidates.size()) return candidates;
    const std::size_t n = candidates.size();
    std::vector<double> dist(n, 0.0), unc(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            dist[a] += raw_cosine_distance(features.at(candidates[a]),
                                           features.at(candidates[b]));
        }
        if (n > 1) dist[a] /= static_cast<double>(n - 1);
        for (const ScoredSample& s : scores) {
            if (s.id == candidates[a]) unc[a] = s.score.u_total;
        }
    }
    auto normalized = [](const std::vector<double>& v) {
        const double lo = *std::min_element(v.begin(), v.end());
        const double hi = *std::max_element(v.begin(), v.end());
        std::vector<double> out(v.size(), 0.5);
        if (hi - lo > 0.0) {
            for (std::size_t a = 0; a < v.size(); ++a) {
                out[a] = (v[a] - lo) / (hi - lo);
            }
        }
        return out;
    };
    const std::vector<double> dn = normalized(dist);
    const std::vector<double> un = normalized(unc);
    std::vector<std::size_t> order(n);
    for (std::size_t a = 0; a < n; ++a) order[a] = a;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ga = dn[a] * (1.0 + un[a]);
        const double gb = dn[b] * (1.0 + un[b]);
        if (ga != gb) return ga > gb;
        return candidates[a] < candidates[b];
    });
    std::vector<std::int64_t> out;
    for (std::size_t t = 0; t < budget; ++t) out.push_back(candidates[order[t]]);
    return out;
}

SuiteResult combinatorial_oracles(const SelftestOptions& opt) {
    const int instances = opt.deep ? 60 : 20;
    RandomStream stream(derive_seed(opt.seed, "selftest_oracle"));
    int bad = 0;
    std::string failure;
    for (int trial = 0; trial < instances && failure.empty(); ++trial) {
        const OracleInstance inst = random_oracle_instance(stream);
        try {
            const LabelContext ctx =
                make_label_context(inst.features, inst.labels, inst.pools,
                                   inst.num_classes, inst.k);
            const auto knn = oracle_knn(inst);
            const auto bounds = oracle_bounds(inst);
            for (std::int64_t i : inst.pools.target_unlabeled) {
                std::vector<int> scores(inst.num_classes, 0);
                double mean = 0.0;
                for (int c = 0; c < inst.num_classes; ++c) {
                    scores[c] = oracle_similarity(i, c, inst, knn, bounds);
                    if (scores[c] != similarity_score(i, c, ctx)) ++bad;
                    mean += scores[c];
                }
                mean /= static_cast<double>(inst.num_classes);
                std::vector<int> expected;
                for (int c = 0; c < inst.num_classes; ++c) {
                    if (scores[c] > 0 && scores[c] > mean) {
                        expected.push_back(c);
                    }
                }
                if (expected != pseudo_label_set(i, ctx)) ++bad;
            }

            std::vector<std::int64_t> batch;
            for (std::int64_t id : inst.pools.source_labeled) {
                batch.push_back(id);
            }
            for (std::int64_t id : inst.pools.target_labeled) {
                batch.push_back(id);
            }
            RandomStream subset_stream(
                derive_seed(opt.seed, "selftest_sub_" + std::to_string(trial)));
            const ContrastiveSubsets subsets = draw_contrastive_subsets(
                batch, inst.labels, inst.pools, 2, subset_stream);
            const double got =
                contrastive_loss(batch, inst.features, inst.labels, inst.pools,
                                 subsets, false)
                    .loss;
            const double want = oracle_contrastive(inst, batch, subsets);
            if (std::abs(got - want) >
                1e-9 * std::max(1.0, std::abs(want))) {
                ++bad;
            }

            std::vector<ScoredSample> scores;
            for (std::int64_t id : inst.all_ids) {
                ScoredSample s;
                s.id = id;
                s.score.u_dom = stream.uniform();
                s.score.u_pred = stream.uniform();
                s.score.u_total =
                    stream.uniform_below(2) == 0
                        ? std::floor(10.0 * stream.uniform()) / 10.0
                        : 2.0 * stream.uniform();
                scores.push_back(s);
            }
            SelectionRound round;
            round.round_index = 1 + static_cast<int>(stream.uniform_below(5));
            round.budget = 1 + stream.uniform_below(3);
            const std::vector<std::int64_t> candidates =
                select_candidates(scores, round);
            if (candidates != oracle_candidates(scores, round)) ++bad;
            const std::size_t budget =
                1 + stream.uniform_below(candidates.size());
            if (diversity_filter(candidates, inst.features, scores, budget) !=
                oracle_diversity(candidates, inst.features, scores, budget)) {
                ++bad;
            }
        } catch (const std::exception& e) {
            failure = e.what();
        }
    }
    SuiteResult r;
    r.name = "combinatorial brute-force equivalence";
    r.passed = failure.empty() && bad == 0;
    if (!failure.empty()) {
        r.detail = "exception: " + failure;
    } else if (r.passed) {
        r.detail = std::to_string(instances) +
                   " random instances across similarity, pseudo-labels, "
                   "contrastive loss, candidate selection and diversity";
    } else {
        r.detail = std::to_string(bad) + " mismatches against brute force";
    }
    return r;
}

} // namespace

bool SelftestReport::all_passed() const {
    for (const SuiteResult& s : suites) {
        if (!s.passed) return false;
    }
    return true;
}

SelftestReport run_selftest(const SelftestOptions& options) {
    if (!options.inject.empty() && options.inject != "udom-sign") {
        throw std::invalid_argument("unknown fault injection: " +
                                    options.inject);
    }
    SelftestReport report;
    report.suites.push_back(mc_agreement(options));
    report.suites.push_back(non_negativity(options));
    report.suites.push_back(entropy_relations(options));
    report.suites.push_back(gradient_check(options));
    report.suites.push_back(combinatorial_oracles(options));
    return report;
}

} // namespace readapt
