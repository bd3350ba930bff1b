// Command-line front end: spectra, surplus histograms, and the identity
// verification suite, with reproducible CSV/JSON outputs.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qg/builtins.hpp"
#include "qg/nodal.hpp"
#include "qg/verify.hpp"

using nlohmann::json;
using namespace qg;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOptions {
    std::string builtin_name;
    std::string graph_file;
    std::string lengths;
    std::string output = "-";
    bool serial = false;
};

MetricGraph load_graph(const CommonOptions& opt) {
    if (opt.builtin_name.empty() == opt.graph_file.empty())
        throw GraphError("give exactly one graph source: --builtin or --graph");
    std::optional<std::vector<double>> lengths;
    if (!opt.lengths.empty())
        lengths = parse_length_list(opt.lengths);
    if (!opt.builtin_name.empty())
        return builtin(opt.builtin_name, lengths);
    MetricGraph g = parse_graph_file(opt.graph_file);
    return lengths ? g.with_lengths(*lengths) : g;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path == "-")
        return std::cout;
    file.open(path);
    if (!file)
        throw IoError("cannot open output file: " + path);
    return file;
}

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--builtin", opt.builtin_name, "builtin graph name");
    cmd->add_option("--graph", opt.graph_file, "graph description file");
    cmd->add_option("--lengths", opt.lengths, "comma-separated edge length expressions");
    cmd->add_option("-o,--output", opt.output, "output path ('-' for stdout)");
    cmd->add_flag("--serial", opt.serial, "disable the OpenMP scan (identical output)");
}

json distribution_json(const SurplusDistribution& d) {
    const auto diag = distribution_diagnostics(d);
    json out;
    out["beta"] = d.beta;
    out["n_samples"] = d.samples;
    out["counts"] = d.counts;
    out["P"] = diag.P;
    out["mean"] = diag.mean;
    out["beta_recovered"] = diag.beta_recovered;
    out["symmetry_residual"] = diag.symmetry_residual;
    out["tv_binomial"] = diag.tv_binomial;
    out["exclusions"] = {{"scanned", d.scanned},
                         {"generic", d.generic},
                         {"excluded", d.excluded},
                         {"mismatches", d.mismatches}};

    json blocks = json::array();
    for (size_t b = 0; b < d.block_beta.size(); ++b) {
        std::vector<long> counts(d.block_beta[b] + 1, 0);
        for (const auto& [tuple, c] : d.joint)
            counts[tuple[b]] += c;
        json jb;
        jb["beta"] = d.block_beta[b];
        jb["counts"] = counts;
        std::vector<double> p(counts.size());
        for (size_t s = 0; s < counts.size(); ++s)
            p[s] = d.samples ? static_cast<double>(counts[s]) / d.samples : 0.0;
        jb["P"] = p;
        blocks.push_back(std::move(jb));
    }
    out["per_block"] = std::move(blocks);

    json conds = json::array();
    if (d.block_beta.size() >= 2) {
        for (const auto& table : conditional_tables(d)) {
            json jt;
            jt["block"] = table.block;
            json rows = json::array();
            for (const auto& row : table.rows)
                rows.push_back({{"given", row.given}, {"samples", row.samples}, {"P", row.P}});
            jt["rows"] = std::move(rows);
            conds.push_back(std::move(jt));
        }
    }
    out["conditionals"] = std::move(conds);
    return out;
}

int cmd_spectrum(const CommonOptions& opt, long count, double kmax, int oversample,
                 const std::string& format) {
    MetricGraph g = load_graph(opt);
    SecularContext ctx(g);
    const auto dec = block_decomposition(g);
    ScanConfig cfg;
    if (count > 0)
        cfg.count = count;
    if (kmax > 0)
        cfg.kmax = kmax;
    cfg.oversample = oversample;
    cfg.parallel = !opt.serial;
    const auto records = scan_spectrum(ctx, cfg);

    std::vector<SurplusSample> samples(records.size());
    for (size_t i = 0; i < records.size(); ++i)
        samples[i] = surplus_sample(ctx, dec, records[i]);

    std::ofstream file;
    std::ostream& out = open_output(opt.output, file);
    const int E = g.edge_count();
    const size_t B = dec.blocks.size();

    if (format == "json") {
        json arr = json::array();
        for (size_t i = 0; i < records.size(); ++i) {
            const auto& rec = records[i];
            json row;
            row["n"] = rec.n;
            row["k"] = rec.k;
            row["mult"] = rec.multiplicity;
            row["class"] = to_string(rec.cls);
            std::vector<double> x(rec.x.coords().data(), rec.x.coords().data() + E);
            row["x"] = x;
            if (samples[i].ok) {
                row["phi"] = samples[i].sigma_direct + rec.n - 1;
                row["sigma_direct"] = samples[i].sigma_direct;
                row["sigma_morse"] = samples[i].sigma_morse;
                row["local"] = samples[i].local;
            }
            if (!samples[i].flag.empty() && rec.cls == SpectralClass::Generic)
                row["flag"] = samples[i].flag;
            arr.push_back(std::move(row));
        }
        out << arr.dump(2) << "\n";
        return 0;
    }

    out << "# quantumgraph " << kVersion
        << " spectrum: n = multiplicity-expanded index, k = eigenvalue, "
           "phi = zero count, sigma = nodal surplus (direct and Morse routes), "
           "s1..s" << B << " = per-block surplus, x1..x" << E << " = torus point; "
           "surplus columns are blank for non-generic or excluded records\n";
    out << "n,k,mult,class,phi,sigma_direct,sigma_morse";
    for (size_t b = 1; b <= B; ++b)
        out << ",s" << b;
    for (int e = 1; e <= E; ++e)
        out << ",x" << e;
    out << ",flag\n";
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        out << rec.n << ',' << format_double(rec.k) << ',' << rec.multiplicity << ','
            << to_string(rec.cls);
        if (samples[i].ok) {
            out << ',' << (samples[i].sigma_direct + rec.n - 1) << ',' << samples[i].sigma_direct
                << ',' << samples[i].sigma_morse;
            for (int v : samples[i].local)
                out << ',' << v;
        } else {
            out << ",,,";
            for (size_t b = 0; b < B; ++b)
                out << ',';
        }
        for (int e = 0; e < E; ++e)
            out << ',' << format_double(rec.x[e]);
        out << ',' << (rec.cls == SpectralClass::Generic ? samples[i].flag : "") << "\n";
    }
    return 0;
}

int cmd_hist(const CommonOptions& opt, long count, int oversample, const std::string& bins) {
    MetricGraph g = load_graph(opt);
    SecularContext ctx(g);
    ScanConfig cfg;
    cfg.oversample = oversample;
    cfg.parallel = !opt.serial;
    const SurplusDistribution d = estimate_distribution(ctx, cfg, count);

    std::ofstream file;
    std::ostream& out = open_output(opt.output, file);
    out << distribution_json(d).dump(2) << "\n";

    if (!bins.empty()) {
        std::ofstream bf(bins);
        if (!bf)
            throw IoError("cannot open bins file: " + bins);
        bf << "sigma,count,P\n";
        for (int s = 0; s <= d.beta; ++s)
            bf << s << ',' << d.counts[s] << ','
               << format_double(static_cast<double>(d.counts[s]) / d.samples) << "\n";
    }
    return 0;
}

int cmd_verify(const CommonOptions& opt, std::uint64_t seed, int points, int spectral_points) {
    MetricGraph g = load_graph(opt);
    const VerifyReport report = run_identity_suite(
        g, seed, points, spectral_points, std::max(10, spectral_points / 10));

    std::ofstream file;
    std::ostream& out = open_output(opt.output, file);
    for (const auto& c : report.checks) {
        if (c.skipped) {
            out << "SKIP  " << c.name << " (" << c.note << ")\n";
            continue;
        }
        out << (c.passed ? "PASS  " : "FAIL  ") << c.name << ": worst " << format_double(c.worst)
            << " vs " << format_double(c.threshold) << " over " << c.points << " points\n";
    }
    out << (report.all_passed() ? "all checks passed\n" : "VERIFICATION FAILED\n");
    return report.all_passed() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantumgraph: metric-graph spectra and nodal surplus statistics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOptions opt_spec, opt_hist, opt_verify;
    long count_spec = 0, count_hist = 100000;
    double kmax = 0.0;
    int oversample_spec = 8, oversample_hist = 8;
    std::string format = "csv", bins;
    std::uint64_t seed = 1;
    int points = 1000, spectral_points = 1000;

    CLI::App* spectrum = app.add_subcommand("spectrum", "locate and classify eigenvalues");
    add_common(spectrum, opt_spec);
    spectrum->add_option("-N,--num-eigenvalues", count_spec, "number of eigenvalues");
    spectrum->add_option("--kmax", kmax, "eigenvalue cutoff (alternative to -N)");
    spectrum->add_option("--oversample", oversample_spec, "grid points per mean spacing");
    spectrum->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    CLI::App* hist = app.add_subcommand("hist", "empirical nodal surplus distribution");
    add_common(hist, opt_hist);
    hist->add_option("-N,--num-eigenvalues", count_hist, "number of eigenvalues to accumulate");
    hist->add_option("--oversample", oversample_hist, "grid points per mean spacing");
    hist->add_option("--bins", bins, "also write a per-bin CSV here");

    CLI::App* verify = app.add_subcommand("verify", "run the identity suite");
    add_common(verify, opt_verify);
    verify->add_option("--seed", seed, "probe point seed");
    verify->add_option("--points", points, "random probe points per check");
    verify->add_option("--spectral-points", spectral_points, "spectral points for symmetry checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (spectrum->parsed())
            return cmd_spectrum(opt_spec, count_spec, kmax, oversample_spec, format);
        if (hist->parsed())
            return cmd_hist(opt_hist, count_hist, oversample_hist, bins);
        if (verify->parsed())
            return cmd_verify(opt_verify, seed, points, spectral_points);
    } catch (const IoError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
