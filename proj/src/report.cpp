#include "ctl/error.hpp"
#include "ctl/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ctl {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
    throw Error(ErrorCode::SchemaError, field + ": " + msg, field);
}

json compute_json(const ComputeAmount& c) {
    return {{"flop", c.to_string()},
            {"log10", c.is_zero() ? json(nullptr) : json(c.log10())}};
}

ComputeAmount compute_from(const json& j, const std::string& field) {
    if (!j.is_object() || !j.contains("log10")) bad(field, "expected {\"flop\", \"log10\"}");
    const auto& l = j["log10"];
    if (l.is_null()) return ComputeAmount::zero();
    if (!l.is_number()) bad(field, "log10 must be a number or null");
    return ComputeAmount::from_log10(l.get<double>());
}

AdjustmentEncoding parse_encoding(const std::string& s, const std::string& field) {
    for (auto e : {AdjustmentEncoding::None, AdjustmentEncoding::ComputeInflation, AdjustmentEncoding::ThresholdLowering}) {
        if (to_string(e) == s) return e;
    }
    bad(field, "unknown encoding '" + s + "'");
}

EventKind kind_from(const json& j, const std::string& field) {
    auto k = parse_event_kind(j.get<std::string>());
    if (!k) bad(field, "unknown event kind");
    return *k;
}

json breakdown_to_json(const ComputeBreakdown& b) {
    json reuse = json::array();
    for (const auto& r : b.reuse_events) {
        reuse.push_back({{"event", r.event_id},
                         {"teacher", r.teacher_id},
                         {"kind", to_string(r.kind)},
                         {"multiplier", r.multiplier}});
    }
    return {{"pretrain", compute_json(b.pretrain)},
            {"creation_kind", to_string(b.creation_kind)},
            {"creation_event", b.creation_event},
            {"finetune_total", compute_json(b.finetune_total)},
            {"finetune_counted", b.finetune_counted},
            {"finetune_fraction", b.finetune_fraction ? json(*b.finetune_fraction) : json(nullptr)},
            {"synthetic_data", compute_json(b.synthetic_data)},
            {"synthetic_counted", b.synthetic_counted},
            {"expansion", compute_json(b.expansion)},
            {"expansion_counted", b.expansion_counted},
            {"counted", compute_json(b.counted)},
            {"reuse_events", std::move(reuse)},
            {"reuse_factor", b.reuse_factor},
            {"reuse_encoding", to_string(b.reuse_encoding)},
            {"expansion_factor", b.expansion_factor},
            {"expansion_encoding", to_string(b.expansion_encoding)},
            {"inference_equivalent_ooms", b.inference_equivalent_ooms.ooms()},
            {"effective", compute_json(b.effective)},
            {"notes", b.notes}};
}

ComputeBreakdown breakdown_from_json(const json& j) {
    const std::string f = "breakdown";
    if (!j.is_object()) bad(f, "expected an object");
    try {
        ComputeBreakdown b;
        b.pretrain = compute_from(j.at("pretrain"), f + ".pretrain");
        b.creation_kind = kind_from(j.at("creation_kind"), f + ".creation_kind");
        b.creation_event = j.at("creation_event").get<std::string>();
        b.finetune_total = compute_from(j.at("finetune_total"), f + ".finetune_total");
        b.finetune_counted = j.at("finetune_counted").get<bool>();
        if (!j.at("finetune_fraction").is_null()) b.finetune_fraction = j["finetune_fraction"].get<double>();
        b.synthetic_data = compute_from(j.at("synthetic_data"), f + ".synthetic_data");
        b.synthetic_counted = j.at("synthetic_counted").get<bool>();
        b.expansion = compute_from(j.at("expansion"), f + ".expansion");
        b.expansion_counted = j.at("expansion_counted").get<bool>();
        b.counted = compute_from(j.at("counted"), f + ".counted");
        for (const auto& r : j.at("reuse_events")) {
            b.reuse_events.push_back({r.at("event").get<std::string>(), r.at("teacher").get<std::string>(),
                                      kind_from(r.at("kind"), f + ".reuse_events.kind"),
                                      r.at("multiplier").get<double>()});
        }
        b.reuse_factor = j.at("reuse_factor").get<double>();
        b.reuse_encoding = parse_encoding(j.at("reuse_encoding").get<std::string>(), f + ".reuse_encoding");
        b.expansion_factor = j.at("expansion_factor").get<double>();
        b.expansion_encoding = parse_encoding(j.at("expansion_encoding").get<std::string>(), f + ".expansion_encoding");
        b.inference_equivalent_ooms = OomValue(j.at("inference_equivalent_ooms").get<double>());
        b.effective = compute_from(j.at("effective"), f + ".effective");
        b.notes = j.at("notes").get<std::vector<std::string>>();
        return b;
    } catch (const json::exception& e) {
        bad(f, e.what());
    }
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

} // namespace

json verdict_to_json(const Verdict& v) {
    json cls = nullptr;
    if (v.classification) {
        cls = {{"category", to_string(v.classification->category)},
               {"derivative", v.classification->derivative ? json(to_string(*v.classification->derivative))
                                                           : json(nullptr)}};
    }
    json obligations = json::array();
    for (const auto& o : v.obligations) {
        obligations.push_back({{"kind", o.kind},
                               {"deadline_days", o.deadline_days ? json(*o.deadline_days) : json(nullptr)}});
    }
    return {{"ruleset", v.ruleset_id},
            {"status", to_string(v.status)},
            {"classification", std::move(cls)},
            {"triggered_rules", v.triggered_rules},
            {"breakdown", breakdown_to_json(v.breakdown)},
            {"citations", v.citations},
            {"obligations", std::move(obligations)}};
}

Verdict verdict_from_json(const json& j) {
    if (!j.is_object()) bad("verdict", "expected an object");
    try {
        Verdict v;
        v.ruleset_id = j.at("ruleset").get<std::string>();
        auto st = parse_coverage_status(j.at("status").get<std::string>());
        if (!st) bad("status", "unknown coverage status");
        v.status = *st;
        if (const auto& c = j.at("classification"); !c.is_null()) {
            auto cat = parse_sb1047_category(c.at("category").get<std::string>());
            if (!cat) bad("classification.category", "unknown category");
            Sb1047Class cls{*cat, std::nullopt};
            if (!c.at("derivative").is_null()) {
                auto d = parse_derivative_kind(c["derivative"].get<std::string>());
                if (!d) bad("classification.derivative", "unknown derivative kind");
                cls.derivative = *d;
            }
            v.classification = cls;
        }
        v.triggered_rules = j.at("triggered_rules").get<std::vector<std::string>>();
        v.breakdown = breakdown_from_json(j.at("breakdown"));
        v.citations = j.at("citations").get<std::vector<std::string>>();
        for (const auto& o : j.at("obligations")) {
            Obligation ob{o.at("kind").get<std::string>(), std::nullopt};
            if (!o.at("deadline_days").is_null()) ob.deadline_days = o["deadline_days"].get<int>();
            v.obligations.push_back(std::move(ob));
        }
        return v;
    } catch (const json::exception& e) {
        bad("verdict", e.what());
    }
}

json verdicts_to_json(const VerdictMap& verdicts) {
    json m = json::object();
    for (const auto& [id, v] : verdicts) m[id] = verdict_to_json(v);
    return {{"verdicts", std::move(m)}};
}

VerdictMap verdicts_from_json(const json& j) {
    if (!j.is_object() || !j.contains("verdicts") || !j["verdicts"].is_object()) {
        bad("verdicts", "expected {\"verdicts\": {...}}");
    }
    VerdictMap out;
    for (auto it = j["verdicts"].begin(); it != j["verdicts"].end(); ++it) {
        out.emplace(it.key(), verdict_from_json(it.value()));
    }
    return out;
}

std::string render_report(const VerdictMap& verdicts, ReportFormat format) {
    if (format == ReportFormat::Json) return verdicts_to_json(verdicts).dump(2) + "\n";

    std::ostringstream out;
    out << pad("RULESET", 32) << pad("STATUS", 12) << pad("EFFECTIVE", 12) << "DETAIL\n";
    for (const auto& [id, v] : verdicts) {
        std::string detail = join(v.triggered_rules, ", ");
        if (v.classification) {
            std::string cls(to_string(v.classification->category));
            if (v.classification->derivative) cls += "/" + std::string(to_string(*v.classification->derivative));
            detail = detail.empty() ? cls : cls + "; " + detail;
        }
        out << pad(id, 32) << pad(std::string(to_string(v.status)), 12) << pad(v.breakdown.effective.to_string(), 12)
            << detail << "\n";
        for (const auto& o : v.obligations) {
            out << "    obligation: " << o.kind;
            if (o.deadline_days) out << " (within " << *o.deadline_days << " days)";
            out << "\n";
        }
        for (const auto& n : v.breakdown.notes) out << "    note: " << n << "\n";
        for (const auto& c : v.citations) out << "    cite: " << c << "\n";
    }
    return out.str();
}

} // namespace ctl
