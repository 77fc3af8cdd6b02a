/*
 * Copyright 2026 The hmera Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hmera/experiments.hpp"
#include "hmera/hmera.hpp"

namespace {

using namespace hmera;

struct Common {
    int K = 0, L = 0;
    std::string pair_file;
    int layers = -1;
    int scale_j = -1;
    double sigma = 0.05;
    long window = -1;
    int refine_depth = -1;
    std::string geometry = "line";
    std::string out;
    std::string format = "csv";
    int workers = 1;
};

void add_pair_flags(CLI::App* app, Common& c) {
    app->add_option("--K", c.K, "vanishing moments of the binomial factor");
    app->add_option("--L", c.L, "order of the half-sample allpass");
    app->add_option("--pair", c.pair_file, "filter-pair JSON file");
}

void add_output_flags(CLI::App* app, Common& c) {
    app->add_option("--out", c.out, "output path (stdout if omitted)");
    app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--workers", c.workers, "worker count")->check(CLI::PositiveNumber);
}

FilterPair resolve_pair(const Common& c) {
    if (!c.pair_file.empty()) return load_pair(c.pair_file);
    if (c.K < 1 || c.L < 1) throw InvalidInput("give --pair FILE or --K and --L (both >= 1)");
    return design_hilbert_pair(c.K, c.L, {});
}

void emit(const Common& c, const Table& t) {
    write_text(c.out, c.format == "json" ? dump_json(t.json()) : t.csv());
}

int cmd_design(const Common& c) {
    if (c.K < 1 || c.L < 1) throw InvalidInput("design needs --K >= 1 and --L >= 1");
    const FilterPair p = design_hilbert_pair(c.K, c.L, {});
    const bool ok = verify_qmf(p.g_s, 1e-12).pass && verify_qmf(p.h_s, 1e-12).pass;
    write_text(c.out, dump_json(pair_to_json(p)));
    std::fprintf(stderr, "epsilon %.6f\n", p.epsilon);
    return ok ? 0 : 1;
}

int cmd_certify(const Common& c) {
    const FilterPair p = resolve_pair(c);
    const int r = c.refine_depth > 0 ? c.refine_depth : 10;
    const WaveletConstants wc = certify_constants(p, r);
    nlohmann::json j = constants_to_json(wc);
    j["K"] = p.K;
    j["L"] = p.L;
    const ScalingFunctions fn = evaluate_functions(p, r);
    const double resid = std::max(refinement_residual(fn.phi_g, p.g_s), refinement_residual(fn.phi_h, p.h_s));
    j["refinement_residual"] = resid;
    if (const auto row = reference_row(p.K, p.L)) {
        j["reference"] = {{"epsilon", row->epsilon}, {"C_UV", row->C_UV},       {"C_IR", row->C_IR},
                          {"C_chi", row->C_chi},     {"C_chi_prime", row->C_chi_prime}, {"C_phi", row->C_phi}};
    }
    const bool ok = verify_qmf(p.g_s, 1e-10).pass && verify_qmf(p.h_s, 1e-10).pass && resid < 1e-10;
    j["gates_pass"] = ok;
    write_text(c.out, dump_json(j));
    return ok ? 0 : 1;
}

int cmd_corr2pt(const Common& c, double x, const std::vector<double>& sep, bool sharp) {
    const FilterPair p = resolve_pair(c);
    Corr2ptConfig cfg;
    cfg.geometry = parse_geometry(c.geometry);
    if (cfg.geometry != Geometry::line) cfg.j = cfg.layers = 10;
    if (c.layers > 0) cfg.layers = c.layers;
    if (c.scale_j > 0) cfg.j = c.scale_j;
    if (c.refine_depth > 0) cfg.refine_depth = c.refine_depth;
    cfg.sigma = c.sigma;
    cfg.x = x;
    cfg.sharp = sharp;
    if (sep.size() == 3) cfg.separations = linear_grid(sep[0], sep[1], static_cast<int>(sep[2]));
    const Corr2ptResult res = run_corr2pt(p, cfg);
    emit(c, res.table);
    return res.bound_ok && res.diagonal_real ? 0 : 1;
}

int cmd_stress2pt(const Common& c, double sigma_t, const std::vector<double>& sep) {
    const FilterPair p = resolve_pair(c);
    Stress2ptConfig cfg;
    if (c.layers > 0) cfg.layers = c.layers;
    if (c.scale_j > 0) cfg.j = c.scale_j;
    if (c.refine_depth > 0) cfg.refine_depth = c.refine_depth;
    cfg.sigma = c.sigma;
    cfg.sigma_time = sigma_t > 0.0 ? sigma_t : c.sigma;
    if (sep.size() == 3) cfg.separations = log_grid(sep[0], sep[1], static_cast<int>(sep[2]));
    const Stress2ptResult res = run_stress2pt(p, cfg);
    emit(c, res.table);
    return res.one_point <= 1e-10 ? 0 : 1;
}

int cmd_entropy(const Common& c, const std::string& geometry, const std::vector<long>& lengths) {
    if (geometry != "periodic") throw InvalidInput("entropy runs on the periodic geometry");
    const FilterPair p = resolve_pair(c);
    EntropyConfig cfg;
    if (c.layers > 0) cfg.layers = c.layers;
    cfg.lengths = lengths;
    const EntropyResult res = run_entropy(p, cfg);
    emit(c, res.table);
    return 0;
}

int cmd_bound(const Common& c, const std::string& constants_file, int n, int m, double D, const std::vector<int>& range, bool table,
              bool headline) {
    BoundParams bp;
    bp.n = n;
    bp.m = m;
    bp.D = D;
    bp.sharp = !headline;
    bp.periodic = c.geometry == "periodic";
    const int lmin = range.size() == 2 ? range[0] : 1;
    const int lmax = range.size() == 2 ? range[1] : 30;
    Table t;
    t.columns = {"K", "L", "layers", "bound", "plateau"};
    bool ok = true;
    auto run = [&](const WaveletConstants& wc, int K, int L, int M) {
        bp.M = M;
        const BoundCurve cur = bound_curve(wc, bp, lmin, lmax);
        for (std::size_t i = 0; i < cur.layers.size(); ++i) {
            if (i > 0 && cur.bound[i] > cur.bound[i - 1]) ok = false;
            t.add({double(K), double(L), double(cur.layers[i]), cur.bound[i], cur.plateau});
        }
    };
    if (table) {
        for (const auto& row : reference_table()) run(constants_from_reference(row), row.K, row.K, 4 * row.K);
    } else if (!constants_file.empty()) {
        std::ifstream in(constants_file);
        if (!in) throw InvalidInput("cannot read " + constants_file);
        nlohmann::json j;
        in >> j;
        const int K = j.value("K", c.K), L = j.value("L", c.L);
        run(constants_from_json(j), K, L, 2 * (K + L));
    } else {
        const FilterPair p = resolve_pair(c);
        run(certify_constants(p, c.refine_depth > 0 ? c.refine_depth : 10), p.K, p.L, p.M());
    }
    t.footer = {{"command", "bound"}, {"n", n}, {"m", m}, {"D", D}, {"constant", headline ? "headline" : "sharp"},
                {"geometry", bp.periodic ? "periodic" : "line"}, {"monotone", ok}};
    emit(c, t);
    return ok ? 0 : 1;
}

int cmd_export_circuit(const Common& c, bool periodic_flag) {
    const FilterPair p = resolve_pair(c);
    const int depth = c.layers > 0 ? c.layers : 4;
    const bool periodic = periodic_flag || c.geometry == "periodic";
    long window = c.window;
    if (window <= 0) {
        const long block = 1L << depth;
        window = periodic ? block : block * std::max<long>(2, ceil_div(4L * p.M(), block));
    }
    const MeraUnitary mu = build_mera_unitary(p, depth, window, periodic);
    const CircuitLayer layer = decompose_layer(p);
    const double defect = reassembly_defect(p, layer, std::max<long>(2 * p.M(), 8));
    const double unit = unitarity_defect(mu.U);
    nlohmann::json j = circuit_to_json(mu, defect);
    j["unitarity_defect"] = unit;
    j["sublayers_per_layer"] = layer.depth();
    write_text(c.out, dump_json(j));
    return defect <= 1e-10 && unit <= 1e-12 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hmera: wavelet MERA for free fermions"};
    app.require_subcommand(1);
    Common c;

    auto* design = app.add_subcommand("design", "design an approximate Hilbert pair and write it as JSON");
    design->add_option("--K", c.K)->required();
    design->add_option("--L", c.L)->required();
    add_output_flags(design, c);

    auto* certify = app.add_subcommand("certify", "certify epsilon and the wavelet constants");
    add_pair_flags(certify, c);
    certify->add_option("--refine-depth", c.refine_depth);
    add_output_flags(certify, c);

    double x = 0.0;
    std::vector<double> sep;
    bool sharp = false;
    auto* corr = app.add_subcommand("corr2pt", "smeared fermion two-point function, MERA against exact");
    add_pair_flags(corr, c);
    corr->add_option("--layers", c.layers);
    corr->add_option("--scale-j", c.scale_j);
    corr->add_option("--sigma", c.sigma);
    corr->add_option("--refine-depth", c.refine_depth);
    corr->add_option("--geometry", c.geometry)->check(CLI::IsMember({"line", "periodic", "antiperiodic"}));
    corr->add_option("--x", x, "centre of the first smearing");
    corr->add_option("--separations", sep, "lo hi count")->expected(3);
    corr->add_flag("--sharp", sharp, "use the sharp bound constant");
    add_output_flags(corr, c);

    double sigma_t = -1.0;
    auto* stress = app.add_subcommand("stress2pt", "smeared stress-energy two-point function");
    add_pair_flags(stress, c);
    stress->add_option("--layers", c.layers);
    stress->add_option("--scale-j", c.scale_j);
    stress->add_option("--sigma", c.sigma);
    stress->add_option("--sigma-time", sigma_t);
    stress->add_option("--refine-depth", c.refine_depth);
    stress->add_option("--separations", sep, "lo hi count (log spaced)")->expected(3);
    add_output_flags(stress, c);

    std::vector<long> lengths;
    std::string entropy_geometry = "periodic";
    auto* entropy = app.add_subcommand("entropy", "interval entanglement entropies on the circle");
    add_pair_flags(entropy, c);
    entropy->add_option("--layers", c.layers);
    entropy->add_option("--geometry", entropy_geometry);
    entropy->add_option("--lengths", lengths, "interval lengths in sites");
    add_output_flags(entropy, c);

    std::string constants_file;
    int n = 2, m = 0;
    double D = std::sqrt(2.0);
    std::vector<int> range;
    bool table = false, headline = false;
    auto* bound = app.add_subcommand("bound", "error bound as a function of the number of layers");
    add_pair_flags(bound, c);
    bound->add_option("--constants", constants_file, "constants JSON from certify");
    bound->add_flag("--table", table, "use every row of the reference table");
    bound->add_option("--n", n);
    bound->add_option("--m", m);
    bound->add_option("--D", D);
    bound->add_option("--layer-range", range, "min max")->expected(2);
    bound->add_flag("--headline", headline, "use the headline constant instead of the sharp one");
    bound->add_option("--geometry", c.geometry)->check(CLI::IsMember({"line", "periodic"}));
    bound->add_option("--refine-depth", c.refine_depth);
    add_output_flags(bound, c);

    bool periodic = false;
    auto* circuit = app.add_subcommand("export-circuit", "rotation circuit of the MERA layers as JSON");
    add_pair_flags(circuit, c);
    circuit->add_option("--layers", c.layers);
    circuit->add_option("--window", c.window);
    circuit->add_option("--geometry", c.geometry)->check(CLI::IsMember({"line", "periodic"}));
    circuit->add_flag("--periodic", periodic);
    add_output_flags(circuit, c);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*design) return cmd_design(c);
        if (*certify) return cmd_certify(c);
        if (*corr) return cmd_corr2pt(c, x, sep, sharp);
        if (*stress) return cmd_stress2pt(c, sigma_t, sep);
        if (*entropy) return cmd_entropy(c, entropy_geometry, lengths);
        if (*bound) return cmd_bound(c, constants_file, n, m, D, range, table, headline);
        if (*circuit) return cmd_export_circuit(c, periodic);
    } catch (const InvalidInput& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
