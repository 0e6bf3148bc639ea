#pragma once

// Straight-line re-implementation of the two learning algorithms, kept
// deliberately naive: dense Q tables, explicit loops, no shared helpers with
// the library except the random streams (which must match draw for draw).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mtoa/rng.hpp"

namespace ref {

struct Params {
    std::size_t n = 1;
    std::size_t L = 1;
    double alpha = 0.9;
    bool global = false;                  // false: MTOA-L, true: MTOA-G
    double q_th = 0.0;                    // MTOA-L
    std::optional<std::uint64_t> window;  // MTOA-G
    std::uint64_t seed = 0;
};

struct Slot {
    std::vector<std::size_t> actions;
    int outcome = 0;  // 0 idle, 1 success, 2 collision
    std::size_t winner = 0;
    std::vector<int> rewards;
    std::vector<std::vector<double>> q_after;
    std::vector<std::uint64_t> w_after;
};

class Interpreter {
public:
    explicit Interpreter(const Params& p) : p_(p) {
        Q.assign(p.n, std::vector<double>(p.L + 1, 0.0));
        W.assign(p.n, 0);
        for (std::size_t i = 0; i < p.n; ++i) rng_.emplace_back(p.seed, i);
    }

    Slot step() {
        Slot s;
        s.actions.resize(p_.n);
        // Every node picks a greedy action; ties are listed in index order and
        // one draw chooses among them.
        for (std::size_t i = 0; i < p_.n; ++i) {
            double best = Q[i][0];
            for (std::size_t a = 1; a <= p_.L; ++a) {
                if (Q[i][a] > best) best = Q[i][a];
            }
            std::vector<std::size_t> tied;
            for (std::size_t a = 0; a <= p_.L; ++a) {
                if (Q[i][a] == best) tied.push_back(a);
            }
            std::size_t choice = tied[0];
            if (tied.size() > 1) choice = tied[rng_[i].below(tied.size())];
            s.actions[i] = choice;
        }

        std::size_t senders = 0;
        for (std::size_t i = 0; i < p_.n; ++i) {
            if (s.actions[i] == 0) {
                ++senders;
                s.winner = i;
            }
        }
        s.outcome = senders == 0 ? 0 : (senders == 1 ? 1 : 2);
        if (s.outcome != 1) s.winner = 0;

        s.rewards.assign(p_.n, 0);
        for (std::size_t i = 0; i < p_.n; ++i) {
            if (p_.global) {
                s.rewards[i] = s.outcome == 1 ? 1 : 0;
            } else {
                s.rewards[i] = (s.outcome == 1 && s.winner == i) ? 1 : 0;
            }
        }

        for (std::size_t i = 0; i < p_.n; ++i) {
            const std::size_t a = s.actions[i];
            Q[i][a] = Q[i][a] + p_.alpha * (s.rewards[i] - Q[i][a]);
            if (!p_.global) {
                if (Q[i][a] <= p_.q_th) Q[i][a] = 0.0;
            } else if (Q[i][a] > 0.0) {
                W[i] = W[i] + 1;
                if (p_.window && W[i] == *p_.window) {
                    W[i] = 0;
                    Q[i][a] = 0.0;
                }
            }
        }
        s.q_after = Q;
        s.w_after = W;
        return s;
    }

    std::vector<std::vector<double>> Q;
    std::vector<std::uint64_t> W;

private:
    Params p_;
    std::vector<mtoa::CounterStream> rng_;
};

}  // namespace ref
