// Shared helpers for the test binaries.
#pragma once

#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>

#include <memory>

#include "imcsynth/game.hpp"
#include "imcsynth/model.hpp"

namespace testing {

inline std::string fixture(const std::string& rel) { return std::string(IMCSYNTH_FIXTURES) + "/" + rel; }

inline imcsynth::ImcModel model(const std::string& name) { return imcsynth::load_imc(fixture("models/" + name)); }

inline imcsynth::ImcModel env_model(const std::string& name) {
    imcsynth::ParseOptions o;
    o.external_cycles_ok = true;
    return imcsynth::load_imc(fixture("models/" + name), o);
}

inline imcsynth::McaSpec spec(const std::string& name) { return imcsynth::load_mca(fixture("models/" + name)); }

// Random model generator shared by the property suites: Markovian edges
// anywhere, interactive edges only forward so the zero-time part is acyclic.
inline imcsynth::ImcModel random_imc(std::mt19937_64& rng, int max_states = 6, int num_actions = 2,
                                     bool closed = false) {
    using namespace imcsynth;
    std::uniform_int_distribution<int> ns(2, max_states);
    const int n = ns(rng);
    ImcModel m;
    m.name = "r";
    for (int i = 0; i < n; ++i) m.add_state("s" + std::to_string(i));
    for (int a = 0; a < num_actions && !closed; ++a) m.add_action(std::string(1, static_cast<char>('a' + a)));
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int s = 0; s < n; ++s) {
        for (int t = s + 1; t < n; ++t) {
            if (u(rng) < 0.25) m.interactive.push_back({s, Label::tau(), t, true});
            if (!closed && u(rng) < 0.2) {
                const auto& a = m.actions[std::uniform_int_distribution<int>(0, num_actions - 1)(rng)];
                m.interactive.push_back({s, Label::external(a), t, false});
            }
        }
        if (u(rng) < 0.6) {
            const int t = pick(rng);
            const double r = 0.5 + 3.0 * u(rng);
            m.markovian.push_back({s, std::round(r * 100) / 100, t});
        }
    }
    m.initial = 0;
    m.goal = {n - 1};
    return m;
}

// An arena with its discretized game; the tree points into the arena, so
// both live behind one stable allocation.
struct Game {
    std::unique_ptr<imcsynth::Arena> arena;
    imcsynth::GameTree tree;
    imcsynth::Partition part;
};

inline Game make_game(const imcsynth::ImcModel& m, const imcsynth::McaSpec& s, double T, int N, int n = 1,
                      bool full = false, bool collapse = true, int resolution = 4) {
    Game g;
    imcsynth::ArenaOptions ao;
    ao.translate.horizon = T;
    ao.translate.resolution = resolution;
    g.arena = std::make_unique<imcsynth::Arena>(imcsynth::build_arena(m, s, ao));
    imcsynth::GameQuery q;
    q.horizon = T;
    q.steps = N;
    q.coarse = n;
    q.full_observation = full;
    q.collapse = collapse;
    g.tree = imcsynth::discretize(*g.arena, q);
    g.part = imcsynth::observation_partition(g.tree);
    return g;
}

// Env's best response by backward induction against a behavioral con
// strategy, written against the raw tree only.
inline double min_against(const imcsynth::GameTree& t, const imcsynth::Partition& p,
                          const std::vector<std::vector<double>>& beh) {
    std::vector<double> val(t.nodes.size());
    for (int v = static_cast<int>(t.nodes.size()) - 1; v >= 0; --v) {
        const auto& n = t.nodes[v];
        auto c = [&](int k) { return val[t.child_of(v, k)]; };
        switch (n.kind) {
            case imcsynth::NodeKind::Terminal: val[v] = n.payoff; break;
            case imcsynth::NodeKind::Env: {
                double m = c(0);
                for (int k = 1; k < n.num_children; ++k) m = std::min(m, c(k));
                val[v] = m;
                break;
            }
            case imcsynth::NodeKind::Chance: {
                double s = 0;
                for (int k = 0; k < n.num_children; ++k) s += t.prob[n.first_child + k] * c(k);
                val[v] = s;
                break;
            }
            case imcsynth::NodeKind::Con: {
                double s = 0;
                for (int k = 0; k < n.num_children; ++k) s += beh[p.cell_of[v]][k] * c(k);
                val[v] = s;
                break;
            }
        }
    }
    return val[0];
}

// Max over a grid of behavioral strategies; only for two-action cells.
inline double grid_maxmin(const imcsynth::GameTree& t, const imcsynth::Partition& p, int resolution) {
    const std::size_t cells = p.cells.size();
    for (const auto& c : p.cells)
        if (c.actions.size() != 2) throw std::invalid_argument("grid search needs two-action cells");
    std::vector<int> idx(cells, 0);
    std::vector<std::vector<double>> beh(cells, std::vector<double>(2));
    double best = -1;
    for (;;) {
        for (std::size_t c = 0; c < cells; ++c) {
            beh[c][0] = static_cast<double>(idx[c]) / resolution;
            beh[c][1] = 1 - beh[c][0];
        }
        best = std::max(best, min_against(t, p, beh));
        std::size_t c = 0;
        while (c < cells && ++idx[c] > resolution) idx[c++] = 0;
        if (c == cells) break;
    }
    return best;
}

}  // namespace testing
