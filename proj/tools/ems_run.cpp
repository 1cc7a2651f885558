#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ems/orchestrator.hpp"
#include "ems/report.hpp"

using namespace ems;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open case file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write report: " + out_path);
    out << text;
}

void print_timings(const orch::ProcedureReport& rep) {
    for (const auto& [name, ms] : rep.timings_ms)
        std::cerr << "time " << name << ": " << strfmt("%.1f ms", ms) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RTCA / SCED / CTS procedure runner"};
    std::string case_path, procedure = "A", model = "M1", out_path, format = "text";
    bool compare = false;
    Config cfg;
    app.add_option("--case", case_path, "case file")->required();
    app.add_option("--procedure", procedure, "A or B")
        ->check(CLI::IsMember({"A", "B", "a", "b"}));
    app.add_option("--model", model, "SCED model M1..M5")
        ->check(CLI::IsMember({"M1", "M2", "M3", "M4", "M5", "m1", "m2", "m3", "m4", "m5"}));
    app.add_option("--pct", cfg.pct, "base-case monitoring tolerance");
    app.add_option("--pctc", cfg.pctc, "contingency monitoring tolerance");
    app.add_option("--ted", cfg.t_ed, "SCED look-ahead time, min");
    app.add_option("--tsr", cfg.t_sr, "spinning reserve response time, min");
    app.add_option("--shed-penalty", cfg.shed_penalty, "load shedding penalty, $/MWh");
    app.add_option("--derate", cfg.limit_derate, "limit derating factor in (0,1]");
    app.add_option("--load-growth", cfg.load_growth, "forecast load scaling");
    app.add_flag("--compare", compare, "run A and B and compare");
    app.add_option("--out", out_path, "report output path (default stdout)");
    app.add_option("--format", format, "text or tabular")
        ->check(CLI::IsMember({"text", "tabular"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // help exits 0, usage errors exit 2
    }

    try {
        Case c = parse_case(slurp(case_path));
        sced::ModelKind kind = *sced::model_from_string(model);
        report::Format fmt = format == "text" ? report::Format::Text : report::Format::Tabular;
        cfg.validate();

        if (compare) {
            orch::ProcedureReport a = orch::run_procedure_a(c, cfg, kind);
            orch::ProcedureReport b = orch::run_procedure_b(c, cfg, kind);
            print_timings(a);
            print_timings(b);
            emit(report::render_compare(a, b, fmt), out_path);
            return a.ok && b.ok ? 0 : 1;
        }
        orch::ProcedureReport rep = (procedure == "B" || procedure == "b")
                                        ? orch::run_procedure_b(c, cfg, kind)
                                        : orch::run_procedure_a(c, cfg, kind);
        print_timings(rep);
        emit(report::render(rep, fmt), out_path);
        return rep.ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
