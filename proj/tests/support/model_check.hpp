#pragma once

// Exhaustive interleaving check of WillStateMachine. Time is discrete: the
// freeze lasts 2 steps and "advance" moves the clock one step. A shadow
// record, kept from the observed operations alone, says whether activation
// was earned; every reachable state is checked against it.

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dw/broker/lifecycle.hpp"

namespace dw::testgen {

struct ModelCheckResult {
    std::size_t states = 0;      // distinct (machine, clock, shadow, depth) nodes
    std::size_t transitions = 0; // operations applied
    std::size_t executed_reached = 0;
    std::size_t veto_checks = 0;
    std::vector<std::string> violations;
};

namespace detail {

struct Shadow {
    std::set<std::string> voters;
    long froze_at = -1;
    bool override_ok = false;
    bool expiry_ok = false;
};

struct Node {
    broker::WillStateMachine m;
    long now = 0;
    Shadow shadow;
    std::string trace;
};

inline std::string key_of(const Node& n, int depth)
{
    std::string k = std::to_string(static_cast<int>(n.m.state())) + "|" + std::to_string(n.now) + "|" +
                    std::to_string(depth) + "|" + std::to_string(n.m.freeze_deadline().value_or(-1)) + "|" +
                    std::to_string(static_cast<int>(n.m.activation())) + "|" + std::to_string(n.m.version()) + "|";
    for (const auto& v : n.m.votes()) k += v + ",";
    k += "|";
    for (const auto& v : n.shadow.voters) k += v + ",";
    k += "|" + std::to_string(n.shadow.froze_at) + std::to_string(n.shadow.override_ok) +
         std::to_string(n.shadow.expiry_ok);
    return k;
}

} // namespace detail

inline ModelCheckResult model_check_lifecycle(int max_len = 8, unsigned threshold = 2, long freeze = 2)
{
    using broker::WillState;
    const std::vector<std::string> heirs = {"h1", "h2", "h3"};
    const std::set<std::string> heir_set(heirs.begin(), heirs.end());

    struct Op {
        std::string name;
        std::function<void(detail::Node&)> apply;
    };
    std::vector<Op> ops;
    for (const auto& h : heirs) {
        ops.push_back({"trigger(" + h + ")", [h](detail::Node& n) { n.m.request_trigger(h); }});
        ops.push_back({"vote(" + h + ")", [h, threshold](detail::Node& n) {
                           n.m.vote(h, n.now);
                           n.shadow.voters.insert(h);
                           if (n.shadow.froze_at < 0 && n.shadow.voters.size() >= threshold) {
                               n.shadow.froze_at = n.now;
                           }
                       }});
    }
    ops.push_back({"vote(stranger)", [](detail::Node& n) { n.m.vote("stranger", n.now); }});
    ops.push_back({"veto", [](detail::Node& n) { n.m.veto(n.now); }});
    ops.push_back({"override", [](detail::Node& n) {
                       n.m.override_activate();
                       n.shadow.override_ok = true;
                   }});
    ops.push_back({"advance", [](detail::Node& n) { ++n.now; }});
    ops.push_back({"tick", [threshold, freeze](detail::Node& n) {
                       if (n.m.tick(n.now)) {
                           n.shadow.expiry_ok = n.shadow.voters.size() >= threshold && n.shadow.froze_at >= 0 &&
                                                n.now >= n.shadow.froze_at + freeze;
                       }
                   }});
    ops.push_back({"execute", [](detail::Node& n) { n.m.mark_executed(); }});
    ops.push_back({"update", [heir_set, threshold, freeze](detail::Node& n) { n.m.update(heir_set, threshold, freeze, true); }});
    ops.push_back({"delete", [](detail::Node& n) { n.m.remove(); }});

    ModelCheckResult res;
    std::set<std::string> seen;

    std::function<void(const detail::Node&, int)> dfs = [&](const detail::Node& n, int depth) {
        if (!seen.insert(detail::key_of(n, depth)).second) return;
        ++res.states;

        const auto st = n.m.state();
        if (st == WillState::Executed) {
            ++res.executed_reached;
            if (!n.shadow.override_ok && !n.shadow.expiry_ok) {
                res.violations.push_back("Executed without threshold+expiry or override: " + n.trace);
            }
        }
        if (st == WillState::Activated && n.m.activation() == broker::Activation::FreezeExpiry && !n.shadow.expiry_ok) {
            res.violations.push_back("activated by expiry without earning it: " + n.trace);
        }
        if (st == WillState::Frozen && n.now < *n.m.freeze_deadline()) {
            ++res.veto_checks;
            auto copy = n.m;
            try {
                copy.veto(n.now);
                if (copy.state() != WillState::Cancelled) res.violations.push_back("veto did not cancel: " + n.trace);
            } catch (const std::exception& e) {
                res.violations.push_back(std::string("veto in freeze threw ") + e.what() + ": " + n.trace);
            }
        }
        if (n.m.votes().size() > 3) res.violations.push_back("votes exceed heirs: " + n.trace);
        if (depth == max_len) return;

        for (const auto& op : ops) {
            detail::Node next = n;
            next.trace += op.name + " ";
            ++res.transitions;
            try {
                op.apply(next);
            } catch (const broker::BrokerError&) {
                if (!(next.m == n.m)) res.violations.push_back("failed op changed state: " + next.trace);
                next.m = n.m;
                next.shadow = n.shadow;
            }
            if ((st == WillState::Executed || st == WillState::Cancelled) && next.m.state() != st) {
                res.violations.push_back("left a terminal state: " + next.trace);
            }
            dfs(next, depth + 1);
        }
    };

    detail::Node root{broker::WillStateMachine(heir_set, threshold, freeze, true), 0, {}, ""};
    dfs(root, 0);
    return res;
}

} // namespace dw::testgen
