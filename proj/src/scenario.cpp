#include "ctl/scenario.hpp"

#include "ctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ctl {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& msg) {
    throw Error(ErrorCode::SchemaError, path + ": " + msg, path);
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
            schema(path + "." + it.key(), "unknown field");
        }
    }
}

const json& require(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) schema(path + "." + key, "required field missing");
    return *it;
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) schema(path, "expected a string");
    return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) schema(path, "expected a boolean");
    return v.get<bool>();
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) schema(path, "expected a number");
    return v.get<double>();
}

ComputeAmount get_compute(const json& v, const std::string& path) {
    try {
        if (v.is_string()) return ComputeAmount::parse(v.get<std::string>());
    } catch (const Error& e) {
        schema(path, e.what());
    }
    schema(path, v.is_number() ? "numbers lose precision; quote the value, e.g. \"9.9e25\""
                             : "expected a decimal string such as \"9.9e25\"");
}

MoneyAmount get_money(const json& v, const std::string& path) {
    try {
        if (v.is_number()) return MoneyAmount(v.get<double>());
        if (v.is_string()) return MoneyAmount(std::stod(v.get<std::string>()));
    } catch (const std::exception& e) {
        schema(path, e.what());
    }
    schema(path, "expected a USD amount");
}

CapabilityDomain get_domain(const json& v, const std::string& path) {
    auto d = parse_capability_domain(get_string(v, path));
    if (!d) schema(path, "expected \"General\" or \"MathCoding\"");
    return *d;
}

std::vector<Anchor> get_anchors(const json& v, const std::string& path) {
    if (!v.is_array()) schema(path, "expected a list of [excess, training_equivalent] pairs");
    std::vector<Anchor> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = path + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != 2) schema(p, "expected a pair");
        out.push_back({get_number(v[i][0], p), get_number(v[i][1], p)});
    }
    return out;
}

json compute_json(const ComputeAmount& c) {
    return c.to_decimal();
}

ModelNode parse_model(const json& m, const std::string& path) {
    if (!m.is_object()) schema(path, "expected an object");
    allow_keys(m, path, {"id", "name", "deployed", "capability_domain", "inference"});
    ModelNode n;
    n.id = get_string(require(m, "id", path), path + ".id");
    if (n.id.empty()) schema(path + ".id", "must not be empty");
    n.name = m.contains("name") ? get_string(m["name"], path + ".name") : n.id;
    if (m.contains("deployed")) n.deployed = get_bool(m["deployed"], path + ".deployed");
    if (m.contains("capability_domain")) {
        n.capability_domain = get_domain(m["capability_domain"], path + ".capability_domain");
    }
    if (m.contains("inference") && !m["inference"].is_null()) {
        const auto& inf = m["inference"];
        const auto ip = path + ".inference";
        if (!inf.is_object()) schema(ip, "expected an object");
        allow_keys(inf, ip, {"per_request_flop", "domain"});
        InferenceProfile prof;
        prof.per_request_compute = get_compute(require(inf, "per_request_flop", ip), ip + ".per_request_flop");
        if (prof.per_request_compute.is_zero()) schema(ip + ".per_request_flop", "must be > 0");
        prof.capability_domain =
            inf.contains("domain") ? get_domain(inf["domain"], ip + ".domain") : n.capability_domain;
        n.inference = prof;
    }
    return n;
}

DerivationEvent parse_event(const json& e, const std::string& path) {
    if (!e.is_object()) schema(path, "expected an object");
    allow_keys(e, path,
               {"kind", "parents", "child", "flop", "cost_usd", "expand_savings_fraction", "surpass_teacher", "planned"});
    DerivationEvent ev;
    const auto kind_text = get_string(require(e, "kind", path), path + ".kind");
    auto kind = parse_event_kind(kind_text);
    if (!kind) schema(path + ".kind", "unknown event kind '" + kind_text + "'");
    ev.kind = *kind;
    if (e.contains("parents")) {
        const auto& ps = e["parents"];
        if (!ps.is_array()) schema(path + ".parents", "expected a list of model ids");
        for (std::size_t i = 0; i < ps.size(); ++i) {
            ev.parent_ids.push_back(get_string(ps[i], path + ".parents[" + std::to_string(i) + "]"));
        }
    }
    ev.child_id = get_string(require(e, "child", path), path + ".child");
    if (e.contains("flop")) ev.compute = get_compute(e["flop"], path + ".flop");
    if (e.contains("cost_usd") && !e["cost_usd"].is_null()) ev.cost = get_money(e["cost_usd"], path + ".cost_usd");
    if (e.contains("expand_savings_fraction") && !e["expand_savings_fraction"].is_null()) {
        ev.expand_savings_fraction = get_number(e["expand_savings_fraction"], path + ".expand_savings_fraction");
    }
    if (e.contains("surpass_teacher") && !e["surpass_teacher"].is_null()) {
        ev.surpass_teacher = get_bool(e["surpass_teacher"], path + ".surpass_teacher");
    }
    if (e.contains("planned")) ev.planned = get_bool(e["planned"], path + ".planned");
    return ev;
}

ScalingConfig parse_scaling(const json& s, const std::string& path) {
    if (!s.is_object()) schema(path, "expected an object");
    allow_keys(s, path,
               {"anchor_preset", "loss_compute_exponent", "loss_noise_std", "confidence_loss_ratio",
                "inference_optimal_coefficient", "general_anchors", "mathcoding_anchors"});
    ScalingConfig cfg;
    if (s.contains("anchor_preset")) {
        const auto preset = get_string(s["anchor_preset"], path + ".anchor_preset");
        if (preset == "sampling") {
            cfg = sampling_anchor_preset();
        } else if (preset != "default") {
            schema(path + ".anchor_preset", "expected \"default\" or \"sampling\"");
        }
    }
    if (s.contains("loss_compute_exponent")) cfg.loss_compute_exponent = get_number(s["loss_compute_exponent"], path + ".loss_compute_exponent");
    if (s.contains("loss_noise_std")) cfg.loss_noise_std = get_number(s["loss_noise_std"], path + ".loss_noise_std");
    if (s.contains("confidence_loss_ratio")) cfg.confidence_loss_ratio = get_number(s["confidence_loss_ratio"], path + ".confidence_loss_ratio");
    if (s.contains("inference_optimal_coefficient")) {
        cfg.inference_optimal_coefficient = get_number(s["inference_optimal_coefficient"], path + ".inference_optimal_coefficient");
    }
    if (s.contains("general_anchors")) cfg.general_anchors = get_anchors(s["general_anchors"], path + ".general_anchors");
    if (s.contains("mathcoding_anchors")) cfg.mathcoding_anchors = get_anchors(s["mathcoding_anchors"], path + ".mathcoding_anchors");
    try {
        validate(cfg);
    } catch (const Error& e) {
        schema(path + "." + e.field(), e.what());
    }
    return cfg;
}

SweepSpec parse_sweep(const json& s, const std::string& path) {
    if (!s.is_object()) schema(path, "expected an object");
    allow_keys(s, path, {"target", "from", "to", "steps", "scale"});
    SweepSpec spec;
    spec.target = get_string(require(s, "target", path), path + ".target");
    spec.from = get_compute(require(s, "from", path), path + ".from");
    spec.to = get_compute(require(s, "to", path), path + ".to");
    if (s.contains("steps")) {
        const auto& st = s["steps"];
        if (!st.is_number_integer()) schema(path + ".steps", "expected an integer");
        spec.steps = st.get<int>();
    }
    if (s.contains("scale") && get_string(s["scale"], path + ".scale") != "Log10") {
        schema(path + ".scale", "only \"Log10\" sweeps are supported");
    }
    if (spec.from.is_zero() || !(spec.from < spec.to)) schema(path, "requires 0 < from < to");
    if (spec.steps < 2 || spec.steps > kMaxSweepSteps) {
        schema(path + ".steps", "must be between 2 and " + std::to_string(kMaxSweepSteps));
    }
    return spec;
}

std::string_view finetune_mode_name(FinetuneCounting m) {
    return m == FinetuneCounting::Never ? "never" : "always";
}

std::string_view reuse_mode_name(ReuseMode m) {
    switch (m) {
        case ReuseMode::None:                   return "none";
        case ReuseMode::MultiplyStudentCompute: return "multiply_student_compute";
        case ReuseMode::LowerThreshold:         return "lower_threshold";
    }
    return "none";
}

std::string_view expansion_mode_name(ExpansionMode m) {
    switch (m) {
        case ExpansionMode::None:                return "none";
        case ExpansionMode::InflateByMaxSavings: return "inflate_by_max_savings";
        case ExpansionMode::LowerThreshold:      return "lower_threshold";
    }
    return "none";
}

CountingPolicy parse_counting(const json& c, CountingPolicy p, const std::string& path) {
    if (!c.is_object()) schema(path, "expected an object");
    allow_keys(c, path, {"finetune", "synthetic_data", "expansion", "reuse", "expansion_adjustment", "inference"});
    if (c.contains("finetune")) {
        const auto& f = c["finetune"];
        const auto fp = path + ".finetune";
        if (f.is_string()) {
            const auto s = f.get<std::string>();
            if (s == "never") p.count_finetune.mode = FinetuneCounting::Never;
            else if (s == "always") p.count_finetune.mode = FinetuneCounting::Always;
            else schema(fp, "expected \"never\", \"always\" or {\"at_least_fraction\": x}");
        } else if (f.is_object()) {
            allow_keys(f, fp, {"at_least_fraction"});
            p.count_finetune.mode = FinetuneCounting::IfAggregateAtLeastFraction;
            p.count_finetune.fraction = get_number(require(f, "at_least_fraction", fp), fp + ".at_least_fraction");
        } else {
            schema(fp, "expected \"never\", \"always\" or {\"at_least_fraction\": x}");
        }
    }
    if (c.contains("synthetic_data")) p.count_synthetic_data = get_bool(c["synthetic_data"], path + ".synthetic_data");
    if (c.contains("expansion")) p.count_expansion = get_bool(c["expansion"], path + ".expansion");
    if (c.contains("inference")) p.inference_adjustment = get_bool(c["inference"], path + ".inference");
    if (c.contains("reuse")) {
        const auto& r = c["reuse"];
        const auto rp = path + ".reuse";
        if (!r.is_object()) schema(rp, "expected an object");
        allow_keys(r, rp, {"mode", "factor"});
        const auto mode = get_string(require(r, "mode", rp), rp + ".mode");
        if (mode == "none") p.reuse_adjustment.mode = ReuseMode::None;
        else if (mode == "multiply_student_compute") p.reuse_adjustment.mode = ReuseMode::MultiplyStudentCompute;
        else if (mode == "lower_threshold") p.reuse_adjustment.mode = ReuseMode::LowerThreshold;
        else schema(rp + ".mode", "unknown reuse mode '" + mode + "'");
        p.reuse_adjustment.factor.reset();
        if (r.contains("factor") && !r["factor"].is_null()) p.reuse_adjustment.factor = get_number(r["factor"], rp + ".factor");
    }
    if (c.contains("expansion_adjustment")) {
        const auto& x = c["expansion_adjustment"];
        const auto xp = path + ".expansion_adjustment";
        if (!x.is_object()) schema(xp, "expected an object");
        allow_keys(x, xp, {"mode", "value"});
        const auto mode = get_string(require(x, "mode", xp), xp + ".mode");
        if (mode == "none") p.expansion_adjustment.mode = ExpansionMode::None;
        else if (mode == "inflate_by_max_savings") p.expansion_adjustment.mode = ExpansionMode::InflateByMaxSavings;
        else if (mode == "lower_threshold") p.expansion_adjustment.mode = ExpansionMode::LowerThreshold;
        else schema(xp + ".mode", "unknown expansion mode '" + mode + "'");
        p.expansion_adjustment.value.reset();
        if (x.contains("value") && !x["value"].is_null()) p.expansion_adjustment.value = get_number(x["value"], xp + ".value");
    }
    try {
        validate(p);
    } catch (const Error& e) {
        schema(path, e.what());
    }
    return p;
}

json counting_to_json(const CountingPolicy& p) {
    json c;
    if (p.count_finetune.mode == FinetuneCounting::IfAggregateAtLeastFraction) {
        c["finetune"] = {{"at_least_fraction", p.count_finetune.fraction}};
    } else {
        c["finetune"] = finetune_mode_name(p.count_finetune.mode);
    }
    c["synthetic_data"] = p.count_synthetic_data;
    c["expansion"] = p.count_expansion;
    c["inference"] = p.inference_adjustment;
    c["reuse"] = {{"mode", reuse_mode_name(p.reuse_adjustment.mode)},
                  {"factor", p.reuse_adjustment.factor ? json(*p.reuse_adjustment.factor) : json(nullptr)}};
    c["expansion_adjustment"] = {
        {"mode", expansion_mode_name(p.expansion_adjustment.mode)},
        {"value", p.expansion_adjustment.value ? json(*p.expansion_adjustment.value) : json(nullptr)}};
    return c;
}

} // namespace

json scaling_to_json(const ScalingConfig& cfg) {
    auto anchors = [](const std::vector<Anchor>& a) {
        json out = json::array();
        for (const auto& p : a) out.push_back({p.excess_ooms, p.training_equivalent_ooms});
        return out;
    };
    return {{"loss_compute_exponent", cfg.loss_compute_exponent},
            {"loss_noise_std", cfg.loss_noise_std},
            {"confidence_loss_ratio", cfg.confidence_loss_ratio},
            {"inference_optimal_coefficient", cfg.inference_optimal_coefficient},
            {"general_anchors", anchors(cfg.general_anchors)},
            {"mathcoding_anchors", anchors(cfg.mathcoding_anchors)}};
}

Ruleset ruleset_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) schema(path, "expected a rule set id or object");
    allow_keys(j, path,
               {"id", "base", "jurisdiction", "engine", "threshold", "cost_threshold_usd", "counting",
                "teacher_propagation", "notification_days", "ambiguity", "sb1047", "citations", "description"});
    Ruleset r;
    if (j.contains("base")) {
        const auto base = get_string(j["base"], path + ".base");
        const Ruleset* b = builtin_registry().find(base);
        if (b == nullptr) schema(path + ".base", "unknown built-in rule set '" + base + "'");
        r = *b;
    }
    r.id = get_string(require(j, "id", path), path + ".id");
    if (j.contains("jurisdiction")) {
        auto jur = parse_jurisdiction(get_string(j["jurisdiction"], path + ".jurisdiction"));
        if (!jur) schema(path + ".jurisdiction", "expected US-Federal, EU or CA-State");
        r.jurisdiction = *jur;
    }
    if (j.contains("engine")) {
        const auto e = get_string(j["engine"], path + ".engine");
        if (e == "threshold") r.engine = RuleEngine::Threshold;
        else if (e == "sb1047") r.engine = RuleEngine::Sb1047;
        else schema(path + ".engine", "expected \"threshold\" or \"sb1047\"");
    }
    if (j.contains("threshold")) r.threshold = get_compute(j["threshold"], path + ".threshold");
    if (j.contains("cost_threshold_usd")) {
        if (j["cost_threshold_usd"].is_null()) r.cost_threshold.reset();
        else r.cost_threshold = get_money(j["cost_threshold_usd"], path + ".cost_threshold_usd");
    }
    if (j.contains("counting")) r.counting = parse_counting(j["counting"], r.counting, path + ".counting");
    if (j.contains("teacher_propagation")) r.teacher_propagation = get_bool(j["teacher_propagation"], path + ".teacher_propagation");
    if (j.contains("notification_days")) {
        const auto& n = j["notification_days"];
        if (n.is_null()) r.notification_rule.reset();
        else if (n.is_number_integer()) r.notification_rule = NotificationRule{n.get<int>()};
        else schema(path + ".notification_days", "expected an integer");
    }
    if (j.contains("ambiguity")) {
        const auto& a = j["ambiguity"];
        const auto ap = path + ".ambiguity";
        if (!a.is_object()) schema(ap, "expected an object");
        allow_keys(a, ap, {"finetune", "expansion"});
        if (a.contains("finetune")) r.ambiguity.finetune = get_bool(a["finetune"], ap + ".finetune");
        if (a.contains("expansion")) r.ambiguity.expansion = get_bool(a["expansion"], ap + ".expansion");
    }
    if (j.contains("sb1047")) {
        const auto& s = j["sb1047"];
        const auto sp = path + ".sb1047";
        if (s.is_null()) {
            r.sb1047.reset();
        } else {
            if (!s.is_object()) schema(sp, "expected an object");
            allow_keys(s, sp, {"finetune_threshold", "finetune_cost_usd"});
            Sb1047Limbs limbs;
            if (s.contains("finetune_threshold")) limbs.finetune_threshold = get_compute(s["finetune_threshold"], sp + ".finetune_threshold");
            if (s.contains("finetune_cost_usd")) limbs.finetune_cost = get_money(s["finetune_cost_usd"], sp + ".finetune_cost_usd");
            r.sb1047 = limbs;
        }
    }
    if (j.contains("citations")) {
        const auto& c = j["citations"];
        if (!c.is_array()) schema(path + ".citations", "expected a list of strings");
        r.citations.clear();
        for (std::size_t i = 0; i < c.size(); ++i) {
            r.citations.push_back(get_string(c[i], path + ".citations[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("description")) r.description = get_string(j["description"], path + ".description");
    if (r.engine == RuleEngine::Sb1047 && !r.sb1047) r.sb1047 = Sb1047Limbs{};
    try {
        validate(r);
    } catch (const Error& e) {
        schema(path, e.what());
    }
    return r;
}

json ruleset_to_json(const Ruleset& r) {
    json j;
    j["id"] = r.id;
    j["jurisdiction"] = to_string(r.jurisdiction);
    j["engine"] = r.engine == RuleEngine::Sb1047 ? "sb1047" : "threshold";
    j["threshold"] = compute_json(r.threshold);
    j["cost_threshold_usd"] = r.cost_threshold ? json(r.cost_threshold->usd()) : json(nullptr);
    j["counting"] = counting_to_json(r.counting);
    j["teacher_propagation"] = r.teacher_propagation;
    j["notification_days"] = r.notification_rule ? json(r.notification_rule->window_days) : json(nullptr);
    j["ambiguity"] = {{"finetune", r.ambiguity.finetune}, {"expansion", r.ambiguity.expansion}};
    if (r.sb1047) {
        j["sb1047"] = {{"finetune_threshold", compute_json(r.sb1047->finetune_threshold)},
                       {"finetune_cost_usd", r.sb1047->finetune_cost.usd()}};
    } else {
        j["sb1047"] = nullptr;
    }
    j["citations"] = r.citations;
    j["description"] = r.description;
    return j;
}

Scenario scenario_from_json(const json& doc) {
    if (!doc.is_object()) schema("$", "expected a JSON object");
    allow_keys(doc, "$", {"models", "events", "subject", "scaling", "rulesets", "sweep"});

    std::vector<ModelNode> nodes;
    const auto& models = require(doc, "models", "$");
    if (!models.is_array()) schema("$.models", "expected a list");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto path = "$.models[" + std::to_string(i) + "]";
        nodes.push_back(parse_model(models[i], path));
        if (!seen.insert(nodes.back().id).second) schema(path + ".id", "duplicate model id '" + nodes.back().id + "'");
    }

    std::vector<DerivationEvent> events;
    if (doc.contains("events")) {
        const auto& evs = doc["events"];
        if (!evs.is_array()) schema("$.events", "expected a list");
        for (std::size_t i = 0; i < evs.size(); ++i) {
            events.push_back(parse_event(evs[i], "$.events[" + std::to_string(i) + "]"));
        }
    }

    Scenario sc;
    sc.lineage = Lineage::from_parts(std::move(nodes), std::move(events));
    if (auto violations = validate(sc.lineage); !violations.empty()) {
        std::string msg = "lineage is invalid:";
        for (const auto& v : violations) msg += " [" + std::string(to_string(v.code)) + "] " + v.message + ";";
        throw Error(ErrorCode::ValidationError, msg, violations.front().subject);
    }

    sc.subject = get_string(require(doc, "subject", "$"), "$.subject");
    if (!sc.lineage.contains(sc.subject)) schema("$.subject", "unknown model '" + sc.subject + "'");

    if (doc.contains("scaling")) sc.scaling = parse_scaling(doc["scaling"], "$.scaling");

    if (doc.contains("rulesets")) {
        const auto& rs = doc["rulesets"];
        if (!rs.is_array()) schema("rulesets", "expected a list of rule set ids or objects");
        std::vector<RulesetRef> refs;
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const auto path = "$.rulesets[" + std::to_string(i) + "]";
            if (rs[i].is_string()) {
                const auto id = rs[i].get<std::string>();
                if (builtin_registry().find(id) == nullptr) {
                    throw Error(ErrorCode::SchemaError, path + ": unknown rule set '" + id + "'", "rulesets");
                }
                refs.emplace_back(id);
            } else {
                refs.emplace_back(ruleset_from_json(rs[i], path));
            }
        }
        std::set<std::string> seen;
        for (const auto& ref : refs) {
            const std::string& id = std::holds_alternative<std::string>(ref) ? std::get<std::string>(ref)
                                                                              : std::get<Ruleset>(ref).id;
            if (!seen.insert(id).second) {
                throw Error(ErrorCode::SchemaError, "$.rulesets: duplicate rule set '" + id + "'", "rulesets");
            }
        }
        sc.rulesets = std::move(refs);
    }

    if (doc.contains("sweep") && !doc["sweep"].is_null()) {
        sc.sweep = parse_sweep(doc["sweep"], "$.sweep");
        check_sweep_target(sc.lineage, sc.sweep->target);
    }
    return sc;
}

Scenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SyntaxError, e.what(), "$");
    }
    return scenario_from_json(doc);
}

json scenario_to_json(const Scenario& sc) {
    json doc;
    json models = json::array();
    for (const auto& n : sc.lineage.nodes()) {
        json m{{"id", n.id},
               {"name", n.name},
               {"deployed", n.deployed},
               {"capability_domain", to_string(n.capability_domain)}};
        if (n.inference) {
            m["inference"] = {{"per_request_flop", compute_json(n.inference->per_request_compute)},
                              {"domain", to_string(n.inference->capability_domain)}};
        }
        models.push_back(std::move(m));
    }
    doc["models"] = std::move(models);

    json events = json::array();
    for (const auto& e : sc.lineage.events()) {
        json ev{{"kind", to_string(e.kind)}, {"parents", e.parent_ids}, {"child", e.child_id},
                {"flop", compute_json(e.compute)}};
        if (e.cost) ev["cost_usd"] = e.cost->usd();
        if (e.expand_savings_fraction) ev["expand_savings_fraction"] = *e.expand_savings_fraction;
        if (e.surpass_teacher) ev["surpass_teacher"] = *e.surpass_teacher;
        if (e.planned) ev["planned"] = true;
        events.push_back(std::move(ev));
    }
    doc["events"] = std::move(events);
    doc["subject"] = sc.subject;
    doc["scaling"] = scaling_to_json(sc.scaling);
    if (sc.rulesets) {
        json rs = json::array();
        for (const auto& ref : *sc.rulesets) {
            if (const auto* id = std::get_if<std::string>(&ref)) rs.push_back(*id);
            else rs.push_back(ruleset_to_json(std::get<Ruleset>(ref)));
        }
        doc["rulesets"] = std::move(rs);
    }
    if (sc.sweep) {
        doc["sweep"] = {{"target", sc.sweep->target},
                        {"from", compute_json(sc.sweep->from)},
                        {"to", compute_json(sc.sweep->to)},
                        {"steps", sc.sweep->steps},
                        {"scale", "Log10"}};
    }
    return doc;
}

std::string render_scenario(const Scenario& scenario) {
    return scenario_to_json(scenario).dump(2) + "\n";
}

Registry selected_registry(const Scenario& scenario, const Registry& builtins) {
    if (!scenario.rulesets) return builtins;
    std::vector<Ruleset> out;
    for (const auto& ref : *scenario.rulesets) {
        if (const auto* id = std::get_if<std::string>(&ref)) {
            const Ruleset* r = builtins.find(*id);
            if (r == nullptr) throw Error(ErrorCode::SchemaError, "unknown rule set '" + *id + "'", "rulesets");
            out.push_back(*r);
        } else {
            out.push_back(std::get<Ruleset>(ref));
        }
    }
    try {
        return Registry(std::move(out));
    } catch (const Error& e) {
        throw Error(ErrorCode::SchemaError, e.what(), "rulesets");
    }
}

Registry selected_registry(std::string_view csv, const Registry& builtins) {
    if (csv == "all") return builtins;
    std::vector<Ruleset> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const auto comma = csv.find(',', start);
        const auto id = csv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (!id.empty()) {
            const Ruleset* r = builtins.find(id);
            if (r == nullptr) throw Error(ErrorCode::SchemaError, "unknown rule set '" + std::string(id) + "'", "rulesets");
            out.push_back(*r);
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    try {
        return Registry(std::move(out));
    } catch (const Error& e) {
        throw Error(ErrorCode::SchemaError, e.what(), "rulesets");
    }
}

} // namespace ctl
