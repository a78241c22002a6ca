// unidex command-line front end.
//
// Exit codes: 0 success, 1 parse/IO/argument error, 2 geometry error,
// 3 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "unidex/io.hpp"
#include "unidex/synthesize.hpp"

namespace {

using namespace unidex;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string spec_path;
    std::string config_path;
    std::uint64_t seed = 0;
    std::size_t order_cap = 720;
    std::size_t mc_centers = 4096;
    std::size_t mc_pool = 20000;
    bool exact = false;
    std::size_t burn_in = 100;
    std::size_t thinning = 10;
};

struct Flags {
    CommonOptions common;
    long long n = 25;
    std::string out;
    std::string format = "csv";
    std::vector<long long> n_list = {10, 25, 50, 100};
    std::size_t trials = 20;
    std::string design_path;
};

// Values from --config are defaults; flags given on the command line win.
void apply_config(const CLI::App& cmd, Flags& f) {
    if (f.common.config_path.empty()) return;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(io::read_file(f.common.config_path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(ParseErrorKind::Syntax, "config '" + f.common.config_path + "': " + e.what(), {});
    }
    if (!doc.is_object()) throw ParseError(ParseErrorKind::Syntax, "config must be a JSON object", {});
    const auto unset = [&](const char* flag) { return cmd.get_option_no_throw(flag) && cmd.count(flag) == 0; };
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "seed") {
                if (unset("--seed")) f.common.seed = value.get<std::uint64_t>();
            } else if (key == "order_cap") {
                if (unset("--order-cap")) f.common.order_cap = value.get<std::size_t>();
            } else if (key == "mc_centers") {
                if (unset("--mc-centers")) f.common.mc_centers = value.get<std::size_t>();
            } else if (key == "mc_pool") {
                if (unset("--mc-pool")) f.common.mc_pool = value.get<std::size_t>();
            } else if (key == "exact") {
                if (unset("--exact")) f.common.exact = value.get<bool>();
            } else if (key == "burn_in") {
                f.common.burn_in = value.get<std::size_t>();
            } else if (key == "thinning") {
                f.common.thinning = value.get<std::size_t>();
            } else if (key == "n") {
                if (unset("--n")) f.n = value.get<long long>();
            } else if (key == "format") {
                if (unset("--format")) f.format = value.get<std::string>();
            } else if (key == "n_list") {
                if (unset("--n-list")) f.n_list = value.get<std::vector<long long>>();
            } else if (key == "trials") {
                if (unset("--trials")) f.trials = value.get<std::size_t>();
            } else {
                throw ParseError(ParseErrorKind::InvalidArgument, "unknown config key '" + key + "'", {});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(ParseErrorKind::InvalidArgument, "config '" + f.common.config_path + "': " + e.what(), {});
    }
}

SynthesisConfig make_config(const CommonOptions& c) {
    SynthesisConfig cfg;
    cfg.seed = c.seed;
    cfg.order_cap = c.order_cap;
    cfg.mc_centers = c.mc_centers;
    cfg.mc_pool = c.mc_pool;
    cfg.exact_ccd = c.exact;
    cfg.sampler = {c.burn_in, c.thinning};
    if (const char* path = std::getenv("UNIDEX_CLASS_TABLE"); path && *path) {
        cfg.classes = scene::ClassTable::from_file(path);
    }
    return cfg;
}

void check_n(long long n) {
    if (n < 2) throw UsageError("N must be ≥ 2");
}

void add_common(CLI::App* cmd, CommonOptions& c) {
    cmd->add_option("spec", c.spec_path, "Scene specification file")->required();
    cmd->add_option("--seed", c.seed, "Seed for CCD estimation, order subsampling and random baselines");
    cmd->add_option("--order-cap", c.order_cap, "Maximum number of conditioning orders to evaluate");
    cmd->add_option("--mc-centers", c.mc_centers, "CCD partition centers (M)");
    cmd->add_option("--mc-pool", c.mc_pool, "CCD volume-fraction pool size (P)");
    cmd->add_flag("--exact", c.exact, "Closed-form CCD (box domains only)");
    cmd->add_option("--config", c.config_path, "JSON file with default values for these flags");
}

std::string order_string(const scene::ConditioningOrder& o, const std::vector<scene::DimMeta>& meta) {
    std::string s;
    for (std::size_t k = 0; k < o.size(); ++k) {
        if (k) s += " < ";
        s += meta[o[k]].name();
    }
    return s;
}

std::string timings_line(const StageTimings& t) {
    std::ostringstream ss;
    ss << "parse=" << t.parse << " geometry=" << t.geometry << " glp=" << t.glp << " transforms=" << t.transforms
       << " ccd=" << t.ccd << " total=" << t.total();
    return ss.str();
}

int run_synthesize(const Flags& f) {
    check_n(f.n);
    if (f.format != "csv" && f.format != "json") throw UsageError("--format must be csv or json");
    const auto start = std::chrono::steady_clock::now();
    const Pipeline pipeline(io::read_file(f.common.spec_path), make_config(f.common));
    const auto result = pipeline.synthesize(static_cast<std::size_t>(f.n));
    const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    const std::string body = f.format == "csv" ? io::to_csv(result.design)
                                               : io::to_json(result.design, f.common.seed, result.timings);
    std::ostream& summary = f.out.empty() ? std::cerr : std::cout;
    if (f.out.empty()) {
        std::cout << body;
    } else {
        io::write_file(f.out, body);
    }
    summary << "ccd: " << io::format_double(result.design.ccd_score) << "\n"
            << "order: " << order_string(result.design.order_used, result.design.dim_meta) << "\n"
            << "orders_evaluated: " << result.orders_evaluated() << " of " << result.viable_order_count << "\n";
    for (const auto& s : result.per_order) summary << "  " << s.order.to_string() << " ccd=" << io::format_double(s.ccd) << "\n";
    summary << "lattice: modulus=" << result.lattice_size << "\n"
            << "timings_ms: " << timings_line(result.timings) << "\n"
            << "wall_ms: " << wall << "\n";
    return 0;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

int run_compare(const Flags& f) {
    if (f.n_list.empty()) throw UsageError("--n-list is empty");
    for (long long n : f.n_list) check_n(n);
    if (f.trials == 0) throw UsageError("--trials must be ≥ 1");
    const Pipeline pipeline(io::read_file(f.common.spec_path), make_config(f.common));
    std::cout << "n,synth_ccd,synth_ms,random_ccd_min,random_ccd_median,random_ccd_max,random_ms_mean\n";
    for (long long n : f.n_list) {
        const auto result = pipeline.synthesize(static_cast<std::size_t>(n));
        std::vector<double> ccds;
        double sample_ms = 0.0;
        for (std::size_t t = 0; t < f.trials; ++t) {
            const auto start = std::chrono::steady_clock::now();
            const auto d = sampling::sample_scene(pipeline.graph(), static_cast<std::size_t>(n),
                                                  derive_seed(f.common.seed, 100 + t), pipeline.config().sampler);
            sample_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            ccds.push_back(pipeline.score(d.points));
        }
        std::cout << n << ',' << io::format_double(result.design.ccd_score) << ',' << result.timings.total() << ','
                  << io::format_double(*std::min_element(ccds.begin(), ccds.end())) << ','
                  << io::format_double(median(ccds)) << ','
                  << io::format_double(*std::max_element(ccds.begin(), ccds.end())) << ','
                  << sample_ms / static_cast<double>(f.trials) << '\n';
        std::cerr << "# n=" << n << " orders_evaluated=" << result.orders_evaluated() << " of "
                  << result.viable_order_count << " timings_ms " << timings_line(result.timings) << '\n';
    }
    return 0;
}

int run_ccd(const Flags& f) {
    const Pipeline pipeline(io::read_file(f.common.spec_path), make_config(f.common));
    const auto table = io::parse_csv(io::read_file(f.design_path));
    const auto& meta = pipeline.domain().dim_meta;
    if (table.columns.size() != meta.size()) {
        throw GeometryError(GeometryErrorKind::DimensionMismatch,
                            "design has " + std::to_string(table.columns.size()) + " columns, spec has " +
                                std::to_string(meta.size()) + " free dimensions");
    }
    for (std::size_t j = 0; j < meta.size(); ++j) {
        if (table.columns[j] != meta[j].name()) {
            std::cerr << "warning: column " << j << " is '" << table.columns[j] << "', expected '" << meta[j].name() << "'\n";
        }
    }
    std::vector<Eigen::Index> outside;
    for (Eigen::Index i = 0; i < table.points.rows(); ++i) {
        if (!table.points.row(i).allFinite() ||
            !geom::contains(pipeline.domain().polytope, table.points.row(i).transpose(), 1e-7)) {
            outside.push_back(i);
        }
    }
    if (!outside.empty()) {
        std::string list;
        for (std::size_t k = 0; k < outside.size(); ++k) list += (k ? "," : "") + std::to_string(outside[k]);
        throw GeometryError(GeometryErrorKind::OutsideDomain, "rows outside the domain: " + list);
    }
    std::cout << "ccd: " << io::format_double(pipeline.score(table.points)) << "\n";
    return 0;
}

int run_sample(const Flags& f) {
    if (f.n < 1) throw UsageError("N must be ≥ 1");
    if (f.format != "csv" && f.format != "json") throw UsageError("--format must be csv or json");
    auto cfg = make_config(f.common);
    const auto spec = dsl::parse(io::read_file(f.common.spec_path));
    const auto graph = scene::build_scene_graph(spec, cfg.classes);
    auto d = sampling::sample_scene(graph, static_cast<std::size_t>(f.n), f.common.seed, cfg.sampler);
    const std::string body = f.format == "csv" ? io::to_csv(d) : io::to_json(d, f.common.seed, {});
    if (f.out.empty()) {
        std::cout << body;
    } else {
        io::write_file(f.out, body);
    }
    return 0;
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const GeometryError*>(&e)) return 2;
    if (dynamic_cast<const NumericError*>(&e)) return 3;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uniform experiment designs for probabilistic scene specifications"};
    app.require_subcommand(1);
    Flags f;

    auto* synth = app.add_subcommand("synthesize", "Low-discrepancy design for a scene spec");
    add_common(synth, f.common);
    synth->add_option("--n", f.n, "Number of design points");
    synth->add_option("--out", f.out, "Output file (default: standard output)");
    synth->add_option("--format", f.format, "csv or json");

    auto* compare = app.add_subcommand("compare", "CCD and timing of synthesized vs random designs");
    add_common(compare, f.common);
    compare->add_option("--n-list", f.n_list, "Design sizes")->delimiter(',');
    compare->add_option("--trials", f.trials, "Random-sampling runs per size");

    auto* score = app.add_subcommand("ccd", "Score an existing CSV design");
    add_common(score, f.common);
    score->add_option("design", f.design_path, "Design CSV")->required();

    auto* sample = app.add_subcommand("sample", "Random hit-and-run design (baseline)");
    add_common(sample, f.common);
    sample->add_option("--n", f.n, "Number of points");
    sample->add_option("--out", f.out, "Output file (default: standard output)");
    sample->add_option("--format", f.format, "csv or json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        apply_config(*active, f);
        if (active == synth) return run_synthesize(f);
        if (active == compare) return run_compare(f);
        if (active == score) return run_ccd(f);
        return run_sample(f);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
