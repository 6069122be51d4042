#pragma once

#include <string>

#include "json.hpp"

#include "qmerkle/advbound.hpp"
#include "qmerkle/attacks.hpp"
#include "qmerkle/problems.hpp"
#include "qmerkle/protocols.hpp"

namespace qmerkle {

using nlohmann::json;

inline std::string key_to_hex(const protocols::Key& key) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(key.size() * 2);
    for (auto byte : key) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0xf]);
    }
    return out;
}

inline json to_json(const QueryCount& qc) { return json{{"f", qc.f}, {"t", qc.t}}; }

inline json to_json(const protocols::Ledger& ledger) {
    return json{{"alice", to_json(ledger.alice)},
                {"bob", to_json(ledger.bob)},
                {"eve", to_json(ledger.eve)}};
}

inline json to_json(const protocols::ProtocolTranscript& tr) {
    json j{{"kind", protocols::kind_name(tr.kind)},
           {"N", tr.N},
           {"k", tr.k},
           {"seed", tr.seed},
           {"X", tr.X},
           {"Y", tr.Y},
           {"bob_indices", tr.bob_indices},
           {"bob_preimages", tr.bob_preimages},
           {"alice_key", key_to_hex(tr.alice_key)},
           {"bob_key", key_to_hex(tr.bob_key)},
           {"ledger", to_json(tr.ledger)},
           {"charged_bob_queries", tr.charged_bob_queries},
           {"success", tr.success}};
    if (tr.w) j["w"] = tr.w->value;
    return j;
}

inline json to_json(const protocols::PublicView& view) {
    json j{{"kind", protocols::kind_name(view.kind)},
           {"N", view.N},
           {"k", view.k},
           {"d", view.d},
           {"r", view.r},
           {"m", view.m},
           {"Y", view.Y},
           {"announced_y", nullptr},
           {"w", nullptr}};
    if (view.announced_y) j["announced_y"] = *view.announced_y;
    if (view.w) j["w"] = view.w->value;
    return j;
}

inline json to_json(const problems::KSumInstance& inst) {
    json values = json::array();
    for (const auto& v : inst.values) values.push_back(v.value);
    json j{{"n", inst.n}, {"k", inst.k}, {"m", inst.m}, {"w", inst.w.value},
           {"values", values}, {"planted", nullptr}};
    if (inst.planted) j["planted"] = *inst.planted;
    return j;
}

inline json to_json(const problems::BucketInstance& inst) {
    json contents = json::array();
    for (std::size_t i = 0; i < inst.base.n; ++i) {
        json row = json::array();
        for (std::size_t pos = 0; pos < inst.ell; ++pos) {
            auto cell = inst.cell(i, pos);
            row.push_back(cell ? json(cell->value) : json(nullptr)); // blank is null
        }
        contents.push_back(row);
    }
    return json{{"base", to_json(inst.base)},
                {"ell", inst.ell},
                {"slots", inst.slots},
                {"contents", contents}};
}

inline json to_json(const problems::HiddenKSumInstance& inst) {
    return json{{"n", inst.n},
                {"k", inst.k},
                {"m", inst.w.modulus},
                {"w", inst.w.value},
                {"y", inst.y},
                {"d", inst.d},
                {"ell", inst.ell},
                {"mixing", inst.mixing},
                {"oracle_seed", inst.oracle.seed()},
                {"r", inst.oracle.range_size()}};
}

inline json to_json(const attacks::AttackResult& result) {
    json j{{"recovered_key", nullptr},
           {"eve_ledger", to_json(result.eve_ledger)},
           {"succeeded", result.succeeded},
           {"seed", result.seed},
           {"config", result.config}};
    if (result.recovered_key) j["recovered_key"] = key_to_hex(*result.recovered_key);
    return j;
}

inline json to_json(const attacks::CostPrediction& p) {
    json j{{"regime", attacks::regime_name(p.regime)},
           {"legit_queries", p.legit_queries},
           {"eve_lower_exponent", p.eve_lower_exponent},
           {"eve_upper_exponent", p.eve_upper_exponent},
           {"eve_queries", nullptr}};
    if (p.eve_queries) j["eve_queries"] = *p.eve_queries;
    return j;
}

inline json to_json(const adv::AdvReport& r) {
    return json{{"n", r.n},
                {"k", r.k},
                {"m", r.m},
                {"w", r.w},
                {"delta_gamma_delta", r.delta_gamma_delta},
                {"target", r.target},
                {"gamma_norm", r.gamma_norm},
                {"excess", r.excess},
                {"delta_j_norms", r.delta_j_norms},
                {"tau", r.tau_value},
                {"adv_value", r.adv_value},
                {"norms_computed", r.norms_computed}};
}

inline json to_json(const adv::CompositionReport& r) {
    json filters = json::array();
    for (std::size_t i = 0; i < r.filter_lhs.size(); ++i)
        filters.push_back(json{{"lhs", r.filter_lhs[i]}, {"rhs", r.filter_rhs[i]}});
    return json{{"ell", r.ell},
                {"bilinear", json{{"lhs", r.bilinear_lhs}, {"rhs", r.bilinear_rhs}}},
                {"norm", json{{"lhs", r.norm_lhs}, {"rhs", r.norm_rhs}}},
                {"filters", filters},
                {"worst_relative_error", r.worst_relative_error}};
}

} // namespace qmerkle
