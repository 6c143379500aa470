// ctl: compute-threshold accounting from the command line.
//
// Exit codes: 0 ok, 1 usage, 2 parse/validation, 3 internal.

#include "ctl/error.hpp"
#include "ctl/scenario.hpp"
#include "ctl/service.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

ctl::Scenario load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ctl::Error(ctl::ErrorCode::SyntaxError, "cannot read '" + path + "'", "file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return ctl::parse_scenario(buf.str());
}

ctl::ReportFormat format_from(const std::string& s) {
    return s == "json" ? ctl::ReportFormat::Json : ctl::ReportFormat::Text;
}

void print_rulesets(std::ostream& out) {
    for (const auto& r : ctl::builtin_registry().all()) {
        out << r.id << "  [" << ctl::to_string(r.jurisdiction) << "]\n";
        if (!r.description.empty()) out << "  " << r.description << "\n";
        for (const auto& line : ctl::threshold_lines(r)) {
            out << "  " << line.label << " " << line.comparator << " " << line.compute.to_decimal() << " FLOP";
            if (line.cost) out << " and cost > $" << static_cast<long long>(line.cost->usd());
            out << "\n";
        }
        if (r.notification_rule) out << "  notification window: " << r.notification_rule->window_days << " days\n";
        for (const auto& c : r.citations) out << "  cite: " << c << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compute-threshold accounting for model lineages"};
    app.require_subcommand(1);

    std::string file;
    std::string rulesets = "";
    std::string format = "text";
    std::string ruleset;
    double tol_ooms = 1e-3;
    int port = 8080;

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate the scenario's subject under each rule set");
    evaluate->add_option("file", file, "Scenario JSON file")->required();
    evaluate->add_option("--rulesets", rulesets, "Comma-separated rule set ids, or 'all'");
    evaluate->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

    auto* sweep = app.add_subcommand("sweep", "Evaluate across the scenario's sweep range");
    sweep->add_option("file", file, "Scenario JSON file")->required();
    sweep->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

    auto* crossing = app.add_subcommand("crossing", "Bisect for the smallest Covered value of the sweep target");
    crossing->add_option("file", file, "Scenario JSON file")->required();
    crossing->add_option("--ruleset", ruleset, "Rule set id")->required();
    crossing->add_option("--tol-ooms", tol_ooms, "Bisection tolerance in orders of magnitude")
        ->check(CLI::PositiveNumber);

    auto* list = app.add_subcommand("rulesets", "List built-in rule sets with thresholds and citations");

    auto* serve = app.add_subcommand("serve", "Start the HTTP service");
    serve->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*evaluate) {
            const ctl::Scenario sc = load(file);
            const ctl::Registry reg = rulesets.empty() ? ctl::selected_registry(sc, ctl::builtin_registry())
                                                       : ctl::selected_registry(rulesets, ctl::builtin_registry());
            std::cout << ctl::render_report(ctl::evaluate_all(sc.lineage, sc.subject, reg, sc.scaling),
                                            format_from(format));
        } else if (*sweep) {
            const ctl::Scenario sc = load(file);
            const ctl::Registry reg = ctl::selected_registry(sc, ctl::builtin_registry());
            std::cout << ctl::render_sweep(ctl::sweep(sc, reg, sc.scaling), format_from(format));
        } else if (*crossing) {
            const ctl::Scenario sc = load(file);
            const ctl::Registry reg = ctl::selected_registry(sc, ctl::builtin_registry());
            const ctl::Ruleset* rs = reg.find(ruleset);
            if (rs == nullptr) rs = &ctl::builtin_registry().at(ruleset);
            try {
                const auto x = ctl::find_crossing(sc, *rs, sc.scaling, tol_ooms);
                std::cout << rs->id << ": Covered from " << x.to_string() << " (" << x.to_decimal() << ", log10 "
                          << x.log10() << ")\n";
            } catch (const ctl::Error& e) {
                if (e.code() != ctl::ErrorCode::NoCrossing) throw;
                std::cout << rs->id << ": no crossing: " << e.what() << "\n";
            }
        } else if (*list) {
            print_rulesets(std::cout);
        } else if (*serve) {
            const std::string host = ctl::default_bind_address();
            if (!ctl::run_server(host, port)) {
                std::cerr << "ctl: cannot bind " << host << ":" << port << "\n";
                return kExitInternal;
            }
        }
    } catch (const ctl::Error& e) {
        std::cerr << "ctl: " << ctl::to_string(e.code()) << ": " << e.what() << "\n";
        return e.code() == ctl::ErrorCode::Internal ? kExitInternal : kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "ctl: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}
