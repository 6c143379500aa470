// Acceptance suite: one PASS/FAIL line per criterion. Exits 0 once every
// criterion has been evaluated; pass --strict to exit 1 when any line fails.

#include "ctl/scenario.hpp"
#include "sb1047_table.hpp"
#include "support.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace ctl;
using ctl::testkit::Builder;
using ctl::testkit::flop;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string read_file(const std::string& name) {
    std::ifstream in(std::string(CTL_SCENARIO_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string run_cli(const std::string& args, int* exit_code) {
    const std::string cmd = std::string(CTL_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    if (pipe == nullptr) {
        *exit_code = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    *exit_code = WEXITSTATUS(pclose(pipe));
    return out;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const ScalingConfig kCfg{};

// 1. Loss/compute relation.
Outcome loss_compute() {
    const double m = compute_multiplier_for_loss_ratio(0.98, kCfg);
    const double f = min_detectable_finetune_fraction(kCfg);
    return {std::abs(m - 1.144) <= 0.001 && std::abs(f - 0.144) <= 0.001,
            "multiplier " + fmt("%.5f", m) + ", min fraction " + fmt("%.5f", f)};
}

// 2. Inference worked example.
Outcome inference_example() {
    const Scenario sc = parse_scenario(R"({"models": [{"id": "m", "inference": {"per_request_flop": "1e14", "domain": "General"}}],
      "events": [{"kind": "Pretrain", "parents": [], "child": "m", "flop": "1e24"}], "subject": "m"})");
    const auto v = evaluate_all(sc.lineage, sc.subject, builtin_registry(), sc.scaling);
    const auto& patch = v.at("eu-inference-patch");
    const double eff = patch.breakdown.effective.log10();
    const bool ok = std::abs(eff - 26.0) <= 0.01 && patch.status == CoverageStatus::Covered &&
                    v.at("eu-aiact-literal").status == CoverageStatus::NotCovered;
    return {ok, "effective 10^" + fmt("%.4f", eff) + ", eu-inference-patch " + std::string(to_string(patch.status)) +
                    ", eu-aiact-literal " + std::string(to_string(v.at("eu-aiact-literal").status))};
}

// 3. Threshold constants and citation anchors in `ctl rulesets`.
Outcome threshold_constants() {
    const Registry& reg = builtin_registry();
    std::vector<std::string> bad;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) bad.push_back(what);
    };
    auto eq = [](const ComputeAmount& a, const char* b) { return std::abs(a.log10() - flop(b).log10()) <= 1e-12; };
    auto line = [&](const char* id, std::size_t i) {
        const auto lines = threshold_lines(reg.at(id));
        return i < lines.size() ? lines[i].compute : ComputeAmount::zero();
    };
    expect(reg.at("eo14110-literal").threshold == flop("1e26"), "eo14110-literal 1e26");
    expect(reg.at("eu-aiact-literal").threshold == flop("1e25"), "eu-aiact-literal 1e25");
    const auto& sb = reg.at("sb1047-vetoed");
    expect(sb.threshold == flop("1e26") && sb.cost_threshold == MoneyAmount(1e8), "sb1047 1e26/$100M");
    expect(sb.sb1047 && sb.sb1047->finetune_threshold == flop("3e25") && sb.sb1047->finetune_cost == MoneyAmount(1e7),
           "sb1047 3e25/$10M");
    expect(eq(line("us-reuse-patch", 1), "1e25"), "us-reuse-patch 1e25");
    expect(eq(line("eu-reuse-patch", 1), "1e24"), "eu-reuse-patch 1e24");
    expect(eq(line("us-expansion-moderate", 1), "5e25"), "us-expansion-moderate 5e25");
    expect(eq(line("us-expansion-conservative", 1), "2e25"), "us-expansion-conservative 2e25");
    expect(eq(line("eu-expansion-moderate", 1), "5e24"), "eu-expansion-moderate 5e24");
    expect(eq(line("eu-expansion-conservative", 1), "2e24"), "eu-expansion-conservative 2e24");
    const auto& eu = reg.at("eu-aiact-literal");
    expect(eu.notification_rule && eu.notification_rule->window_days == 14, "14-day notification");

    int code = 0;
    const std::string out = run_cli("rulesets", &code);
    expect(code == 0, "ctl rulesets exit code");
    std::size_t anchors = 0;
    for (const auto& r : reg.all()) {
        expect(out.find(r.id) != std::string::npos, "listing of " + r.id);
        for (const auto& c : r.citations) {
            ++anchors;
            expect(out.find(c) != std::string::npos, "citation of " + r.id);
        }
    }
    for (const char* s : {"training compute > 1e26 FLOP", "training compute > 1e25 FLOP",
                          "covered model > 1e26 FLOP and cost > $100000000",
                          "fine-tune of a covered model >= 3e25 FLOP and cost > $10000000",
                          "reuse-derived model > 1e25 FLOP", "reuse-derived model > 1e24 FLOP",
                          "expanded model > 5e25 FLOP", "expanded model > 2e25 FLOP", "expanded model > 5e24 FLOP",
                          "expanded model > 2e24 FLOP", "notification window: 14 days"}) {
        expect(out.find(s) != std::string::npos, std::string("'") + s + "' in ctl rulesets");
    }
    std::string detail = std::to_string(reg.all().size()) + " rule sets, " + std::to_string(anchors) +
                         " citation anchors checked";
    for (const auto& b : bad) detail += "; missing " + b;
    return {bad.empty(), detail};
}

// 4. SB 1047 truth table and partition.
Outcome sb1047_table() {
    using namespace ctl::testkit::sb1047;
    const Ruleset& rs = builtin_registry().at("sb1047-vetoed");
    int rows = 0;
    int mismatches = 0;
    for (const auto& r : kRoots) {
        ++rows;
        const Lineage l = Builder().pretrain("A", r.compute, r.cost);
        if (sb1047_classification(l, "A", rs) != Sb1047Class{r.expected, std::nullopt}) ++mismatches;
    }
    for (const auto& r : kTable) {
        ++rows;
        Builder b;
        if (r.covered_parent) b.pretrain("P", "1.2e26", 1.5e8);
        else b.pretrain("P", "5e25", 6e7);
        b.event(r.kind, {"P"}, "X", r.compute, r.cost);
        if (sb1047_classification(b, "X", rs) != Sb1047Class{r.expected, r.derivative}) ++mismatches;
    }
    testkit::Rng rng(0x5b1047);
    int partition_failures = 0;
    int nodes = 0;
    for (int i = 0; i < 1000; ++i) {
        const Lineage l = testkit::random_lineage(rng, {.min_nodes = 1, .max_nodes = 8, .centre_log10 = 26.0});
        for (const auto& n : l.nodes()) {
            ++nodes;
            const Sb1047Class c = sb1047_classification(l, n.id, rs);
            const int classes = (c.category == Sb1047Category::CoveredModel) +
                                (c.category == Sb1047Category::CoveredModelDerivative) +
                                (c.category == Sb1047Category::Neither);
            const bool ok = classes == 1 && c.derivative.has_value() == (c.category == Sb1047Category::CoveredModelDerivative) &&
                            c == oracle(l, n.id);
            if (!ok) ++partition_failures;
        }
    }
    return {mismatches == 0 && partition_failures == 0,
            std::to_string(rows) + " table rows, " + std::to_string(mismatches) + " mismatches; " +
                std::to_string(nodes) + " nodes in 1000 lineages, " + std::to_string(partition_failures) +
                " partition failures"};
}

// 5. The 15% rule boundary.
Outcome fifteen_percent() {
    const Scenario sc = parse_scenario(R"({"models": [{"id": "a"}, {"id": "b"}],
      "events": [{"kind": "Pretrain", "parents": [], "child": "a", "flop": "1e26"},
                 {"kind": "FineTune", "parents": ["a"], "child": "b", "flop": "1e24"}],
      "subject": "b", "sweep": {"target": "events/b/flop", "from": "1e24", "to": "1e26", "steps": 5}})");
    const Ruleset& rs = builtin_registry().at("eo14110-ft15");
    const double tol = 1e-3;
    const double bisected = find_crossing(sc, rs, kCfg, tol).log10();
    // Closed form: fine-tuning counts once it reaches 15% of 1e26, and
    // 1e26 + 0.15e26 > 1e26, so the crossing is 0.15 * 1e26.
    const double closed = std::log10(rs.counting.count_finetune.fraction) + 26.0;
    const bool crossing_ok = std::abs(bisected - std::log10(1.5e25)) <= tol && std::abs(closed - std::log10(1.5e25)) <= 1e-12;

    const Lineage agg = Builder().pretrain("a", "1e26").finetune("a", "f1", "8e24").finetune("f1", "f2", "8e24");
    const auto events = finetune_reporting_events(agg, "f2", 0.15);
    const bool agg_ok = events.size() == 1 && events[0].event_id == "f2" && std::abs(events[0].fraction - 0.16) <= 1e-12;
    return {crossing_ok && agg_ok, "bisection 10^" + fmt("%.6f", bisected) + " vs closed form 10^" + fmt("%.6f", closed) +
                                       "; aggregate reporting events " + std::to_string(events.size()) +
                                       (events.empty() ? "" : " at '" + events[0].event_id + "'")};
}

// 6. Duality of threshold lowering and compute inflation.
Outcome duality() {
    const std::vector<std::pair<const char*, const char*>> pairs{
        {"us-reuse-patch", "us-reuse-patch-inflate"},
        {"eu-reuse-patch", "eu-reuse-patch-inflate"},
        {"us-expansion-moderate", "us-expansion-moderate-inflate"},
        {"us-expansion-conservative", "us-expansion-conservative-inflate"},
        {"eu-expansion-moderate", "eu-expansion-moderate-inflate"},
        {"eu-expansion-conservative", "eu-expansion-conservative-inflate"},
    };
    const auto t0 = Clock::now();
    testkit::Rng rng(0xd0a1);
    int disagreements = 0;
    int comparisons = 0;
    int adjusted = 0;
    for (int i = 0; i < 1000; ++i) {
        const Scenario sc = testkit::random_scenario(rng);
        for (const auto& [lower, inflate] : pairs) {
            const Verdict a = evaluate(sc.lineage, sc.subject, builtin_registry().at(lower), sc.scaling);
            const Verdict b = evaluate(sc.lineage, sc.subject, builtin_registry().at(inflate), sc.scaling);
            ++comparisons;
            if (a.breakdown.threshold_divisor() != 1.0) ++adjusted;
            if (a.status != b.status) ++disagreements;
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return {disagreements == 0 && secs < 10.0,
            std::to_string(comparisons) + " comparisons (" + std::to_string(adjusted) + " with an adjustment), " +
                std::to_string(disagreements) + " disagreements, " + fmt("%.2f", secs) + " s"};
}

// 7. Monotonicity and bisection against a grid scan.
Outcome monotonicity() {
    constexpr int kPairs = 500;
    constexpr int kGrid = 10'000;
    constexpr double kTol = 1e-3;
    const auto t0 = Clock::now();
    std::string failures;
    int total_flips = 0;
    int total_mismatch = 0;
    int compared = 0;
    for (std::size_t ri = 0; ri < builtin_registry().all().size(); ++ri) {
        const Ruleset& rs = builtin_registry().all()[ri];
        testkit::Rng rng(0x70707 + ri);
        int flips = 0;
        int mismatch = 0;
        std::string example;
        for (int k = 0; k < kPairs; ++k) {
            Scenario sc;
            sc.lineage = testkit::random_lineage(rng);
            sc.subject = rng.pick(sc.lineage.nodes()).id;
            const std::string target = rng.pick(testkit::sweep_targets(sc.lineage));
            const bool inference = target.rfind("models/", 0) == 0;
            double current;
            if (inference) {
                current = sc.lineage.find_node(target.substr(7, target.size() - 7 - 27))->inference->per_request_compute.log10();
            } else {
                current = sc.lineage.creating_event(target.substr(7, target.size() - 12))->compute.log10();
            }
            const double lo = std::max(0.0, current - rng.uniform(0.5, 2.5));
            const double hi = current + rng.uniform(0.5, 2.5);
            sc.sweep = SweepSpec{target, ComputeAmount::from_log10(lo), ComputeAmount::from_log10(hi), kGrid};

            const auto grid = log_grid(sc.sweep->from, sc.sweep->to, kGrid);
            Lineage work = sc.lineage;
            StatusProbe probe(work, sc.subject, rs, sc.scaling);
            int first = -1;
            bool flipped = false;
            for (int g = 0; g < kGrid; ++g) {
                if (inference) work.set_inference_compute(target.substr(7, target.size() - 7 - 27), grid[static_cast<std::size_t>(g)]);
                else work.set_event_compute(target.substr(7, target.size() - 12), grid[static_cast<std::size_t>(g)]);
                const bool covered = probe.status() == CoverageStatus::Covered;
                if (covered && first < 0) first = g;
                if (!covered && first >= 0 && !flipped) {
                    flipped = true;
                    if (example.empty()) {
                        example = " (e.g. " + target + " 10^" + fmt("%.5f", grid[static_cast<std::size_t>(g - 1)].log10()) +
                                  " Covered, 10^" + fmt("%.5f", grid[static_cast<std::size_t>(g)].log10()) + " NotCovered)";
                    }
                }
            }
            if (flipped) {
                ++flips;
                continue;
            }
            try {
                const auto c = find_crossing(sc, rs, sc.scaling, kTol);
                const double spacing = (hi - lo) / (kGrid - 1);
                if (first <= 0 || std::abs(c.log10() - grid[static_cast<std::size_t>(first)].log10()) > kTol + spacing) {
                    ++mismatch;
                }
                ++compared;
            } catch (const Error& e) {
                // Both ends alike: the grid must agree there is no crossing.
                const bool expected = e.code() == ErrorCode::NoCrossing && (first <= 0);
                if (!expected) ++mismatch;
            }
        }
        total_flips += flips;
        total_mismatch += mismatch;
        if (flips > 0 || mismatch > 0) {
            failures += "; " + rs.id + ": " + std::to_string(flips) + " flips, " + std::to_string(mismatch) + " mismatches" + example;
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return {total_flips == 0 && total_mismatch == 0 && secs < 60.0,
            std::to_string(builtin_registry().all().size()) + " rule sets x " + std::to_string(kPairs) + " pairs x " +
                std::to_string(kGrid) + " grid points, " + std::to_string(compared) + " crossings compared, " +
                fmt("%.1f", secs) + " s" + failures};
}

// 8. Incognito teacher.
Outcome incognito() {
    const Scenario sc = parse_scenario(read_file("incognito-teacher.json"));
    const auto& teacher = *sc.lineage.find_node("teacher");
    const auto patch = evaluate(sc.lineage, sc.subject, builtin_registry().at("us-reuse-patch"), sc.scaling);
    const auto literal = evaluate(sc.lineage, sc.subject, builtin_registry().at("eo14110-literal"), sc.scaling);
    const bool ok = !teacher.deployed && builtin_registry().at("us-reuse-patch").teacher_propagation &&
                    patch.status == CoverageStatus::Covered && literal.status == CoverageStatus::NotCovered;
    return {ok, "us-reuse-patch " + std::string(to_string(patch.status)) + " (" +
                    (patch.triggered_rules.empty() ? "" : patch.triggered_rules.front()) + "), eo14110-literal " +
                    std::string(to_string(literal.status))};
}

// 9. Round trips and determinism.
Outcome round_trips() {
    testkit::Rng rng(0x9090);
    int scenario_failures = 0;
    int verdict_failures = 0;
    int determinism_failures = 0;
    for (int i = 0; i < 1000; ++i) {
        const Scenario sc = testkit::random_scenario(rng, {.planned_probability = 0.1});
        const std::string text = render_scenario(sc);
        const Scenario back = parse_scenario(text);
        if (!(back == sc) || render_scenario(back) != text) ++scenario_failures;

        const auto verdicts = evaluate_all(sc.lineage, sc.subject, selected_registry(sc, builtin_registry()), sc.scaling);
        const std::string json_text = render_report(verdicts, ReportFormat::Json);
        if (!(verdicts_from_json(nlohmann::json::parse(json_text)) == verdicts)) ++verdict_failures;
        const auto again = evaluate_all(back.lineage, back.subject, selected_registry(back, builtin_registry()), back.scaling);
        if (render_report(again, ReportFormat::Json) != json_text ||
            render_report(again, ReportFormat::Text) != render_report(verdicts, ReportFormat::Text)) {
            ++determinism_failures;
        }
    }
    int cli_failures = 0;
    for (const char* f : {"finetune-loophole.json", "incognito-teacher.json", "expansion.json", "inference-worked.json",
                          "sb1047.json"}) {
        for (const char* format : {"text", "json"}) {
            int c1 = 0;
            int c2 = 0;
            const std::string args = std::string("evaluate ") + CTL_SCENARIO_DIR + "/" + f + " --format " + format;
            if (run_cli(args, &c1) != run_cli(args, &c2) || c1 != 0 || c2 != 0) ++cli_failures;
        }
    }
    return {scenario_failures + verdict_failures + determinism_failures + cli_failures == 0,
            "1000 scenarios: " + std::to_string(scenario_failures) + " scenario, " + std::to_string(verdict_failures) +
                " verdict, " + std::to_string(determinism_failures) + " determinism failures; " +
                std::to_string(cli_failures) + " CLI byte differences over two runs"};
}

} // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"loss-compute multiplier and 15% detectability", loss_compute},
        {"inference worked example", inference_example},
        {"threshold constants and citations", threshold_constants},
        {"SB 1047 truth table and partition", sb1047_table},
        {"15% rule boundary", fifteen_percent},
        {"threshold-lowering / compute-inflation duality", duality},
        {"monotonicity and bisection oracle", monotonicity},
        {"incognito-teacher propagation", incognito},
        {"round trips and determinism", round_trips},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria pass"
              << std::endl;
    return strict && failed > 0 ? 1 : 0;
}
