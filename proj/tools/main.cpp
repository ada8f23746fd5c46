// Command-line front end of the complex vibronic-model toolkit: builds the
// JT/PJT diabatic models, scans surfaces, locates degeneracies, evaluates
// geometric phases and couplings, and fits model parameters to resonance
// data. Outputs are plot-ready CSV tables or JSON records.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "vibronic/berry.hpp"
#include "vibronic/diabatic.hpp"
#include "vibronic/io.hpp"
#include "vibronic/nac.hpp"

namespace {

using namespace vibronic;
using nlohmann::json;

constexpr double kRadPerDeg = 3.14159265358979323846 / 180.0;

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::fwrite(content.data(), 1, content.size(), stdout);
    } else {
        atomic_write(out_path, content);
    }
}

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw SchemaError(std::string(what) + ": expected 'a,b'");
    }
    try {
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw SchemaError(std::string(what) + ": bad number in '" + text + "'");
    }
}

std::pair<double, double> parse_range(const std::string& text, const char* what) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw SchemaError(std::string(what) + ": expected 'lo:hi'");
    }
    try {
        return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw SchemaError(std::string(what) + ": bad number in '" + text + "'");
    }
}

GridAxis parse_axis(const std::string& text, const char* what) {
    std::size_t c1 = text.find(':');
    std::size_t c2 = (c1 == std::string::npos) ? std::string::npos : text.find(':', c1 + 1);
    if (c2 == std::string::npos) {
        throw SchemaError(std::string(what) + ": expected 'lo:hi:n'");
    }
    GridAxis axis;
    try {
        axis.lo = std::stod(text.substr(0, c1));
        axis.hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        axis.n = std::stoi(text.substr(c2 + 1));
    } catch (const std::exception&) {
        throw SchemaError(std::string(what) + ": bad number in '" + text + "'");
    }
    if (axis.n < 1) throw SchemaError(std::string(what) + ": n must be positive");
    return axis;
}

json complex_json(cdouble z) { return json::array({z.real(), z.imag()}); }

std::string surface_json(const SurfaceTable& table) {
    json rows = json::array();
    for (const auto& sp : table.points) {
        json row;
        row["qx"] = sp.q.qx;
        row["qy"] = sp.q.qy;
        for (int b = 0; b < table.dim; ++b) {
            row["v" + std::to_string(b + 1)] = complex_json(sp.v[b]);
        }
        row["rigidity"] = sp.rigidity;
        rows.push_back(row);
    }
    json root;
    root["dim"] = table.dim;
    root["points"] = rows;
    return root.dump(2) + "\n";
}

int run_cli(int argc, char** argv) {
    CLI::App app{"cvibron: complex Jahn-Teller / pseudo-Jahn-Teller vibronic toolkit"};
    app.require_subcommand(1);

    std::string params_path, data_path, init_path, out_path, grid_text, qx_text;
    std::string center_text = "0,0", method_text = "both", gauge_text = "single-valued";
    std::string format_text = "csv";
    std::string rho_text = "0:0.6", phi_text = "0:360", point_text = "0.1,0";
    double radius = 0.05, step = 1e-5, sigma = 0.0, v_ion = 0.0;
    double berry_tol = 1e-4, d_rho = 0.002, d_phi_deg = 0.25;
    double weight_re = 1.0, weight_im = 1.0;
    std::uint64_t seed = 0;
    int n_points = 512, n_res = 1, order = 2;
    std::string model_text = "pjt";
    std::vector<std::string> validate_files;

    auto* surface = app.add_subcommand("surface", "Adiabatic surfaces over a 2D grid (CSV)");
    surface->add_option("--params", params_path, "model parameter JSON file")->required();
    surface->add_option("--grid", grid_text, "qx=lo:hi:n,qy=lo:hi:n or rho=...,phi=... (deg)")
        ->required();
    surface->add_option("--out", out_path, "output path (default stdout)");
    surface->add_option("--format", format_text, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* slice = app.add_subcommand("slice", "Closed-form slice potentials along Qy = 0 (CSV)");
    slice->add_option("--params", params_path)->required();
    slice->add_option("--qx", qx_text, "lo:hi:n")->required();
    slice->add_option("--out", out_path);

    auto* berry = app.add_subcommand("berry", "Geometric phase around a circular loop (JSON)");
    berry->add_option("--params", params_path)->required();
    berry->add_option("--center", center_text, "loop center 'qx,qy'");
    berry->add_option("--radius", radius, "loop radius")->required();
    berry->add_option("--n-points", n_points, "initial discretization (>= 16)");
    berry->add_option("--method", method_text, "line, holonomy or both")
        ->check(CLI::IsMember({"line", "holonomy", "both"}));
    berry->add_option("--tol", berry_tol, "refinement tolerance on tau");
    berry->add_option("--out", out_path);

    auto* nac = app.add_subcommand("nac", "First-derivative coupling at a point (JSON)");
    nac->add_option("--params", params_path)->required();
    nac->add_option("--point", point_text, "'qx,qy'")->required();
    nac->add_option("--step", step, "finite-difference step");
    nac->add_option("--gauge", gauge_text, "raw or single-valued")
        ->check(CLI::IsMember({"raw", "single-valued"}));
    nac->add_option("--out", out_path);

    auto* findep = app.add_subcommand("find-ep", "Locate degeneracies in an annulus (JSON)");
    findep->add_option("--params", params_path)->required();
    findep->add_option("--rho", rho_text, "lo:hi");
    findep->add_option("--phi", phi_text, "lo:hi in degrees");
    findep->add_option("--d-rho", d_rho, "scan resolution in rho");
    findep->add_option("--d-phi", d_phi_deg, "scan resolution in degrees");
    findep->add_option("--out", out_path);

    auto* seams = app.add_subcommand("seams", "Trace Re/Im degeneracy seams (CSV)");
    seams->add_option("--params", params_path)->required();
    seams->add_option("--rho", rho_text, "lo:hi");
    seams->add_option("--phi", phi_text, "lo:hi in degrees");
    seams->add_option("--d-rho", d_rho, "scan resolution in rho");
    seams->add_option("--d-phi", d_phi_deg, "scan resolution in degrees");
    seams->add_option("--out", out_path);

    auto* fit = app.add_subcommand("fit", "Fit model parameters to slice data (JSON)");
    fit->add_option("--data", data_path, "slice CSV file")->required();
    fit->add_option("--model", model_text, "pjt or jt")->check(CLI::IsMember({"pjt", "jt"}));
    fit->add_option("--order", order, "2 or 3 (pjt only)")->check(CLI::IsMember({2, 3}));
    fit->add_option("--init", init_path, "optional starting parameters JSON");
    fit->add_option("--weight-re", weight_re, "real-part residual weight");
    fit->add_option("--weight-im", weight_im, "imaginary-part residual weight");
    fit->add_option("--out", out_path);

    auto* bwfit = app.add_subcommand("bw-fit", "Fit resonances to a time-delay curve (JSON)");
    bwfit->add_option("--data", data_path, "time-delay CSV file")->required();
    bwfit->add_option("--n-res", n_res, "number of resonances")->required();
    bwfit->add_option("--out", out_path);

    auto* synth = app.add_subcommand("synth", "Synthetic slice data from a model (CSV)");
    synth->add_option("--params", params_path)->required();
    synth->add_option("--qx", qx_text, "lo:hi:n")->required();
    synth->add_option("--sigma", sigma, "Gaussian noise level (Hartree)");
    synth->add_option("--seed", seed, "noise seed");
    synth->add_option("--v-ion", v_ion, "ion energy offset");
    synth->add_option("--out", out_path);

    auto* validate = app.add_subcommand("validate", "Schema-check files without computing (JSON)");
    validate->add_option("files", validate_files, "params JSON / data CSV files")->required();
    validate->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);

    if (surface->parsed()) {
        const ModelParams m = load_params_file(params_path);
        const GridSpec spec = parse_grid_spec(grid_text);
        const SurfaceTable table = grid_scan(m, spec);
        emit(out_path, format_text == "json" ? surface_json(table) : format_surface_csv(table));
        return 0;
    }

    if (slice->parsed()) {
        const ModelParams m = load_params_file(params_path);
        const GridAxis axis = parse_axis(qx_text, "--qx");
        const int dim = model_dim(m);
        std::string out = (dim == 3) ? "qx,re_v1,im_v1,re_v2,im_v2,re_v3,im_v3\n"
                                     : "qx,re_v1,im_v1,re_v2,im_v2\n";
        for (int i = 0; i < axis.n; ++i) {
            const double qx =
                (axis.n == 1) ? axis.lo : axis.lo + i * (axis.hi - axis.lo) / (axis.n - 1);
            const auto v = detail::slice_branch_values(m, qx);
            out += format_g17(qx);
            for (int b = 0; b < dim; ++b) {
                out += ',';
                out += format_g17(v[b].real());
                out += ',';
                out += format_g17(v[b].imag());
            }
            out += '\n';
        }
        emit(out_path, out);
        return 0;
    }

    if (berry->parsed()) {
        const ModelParams m = load_params_file(params_path);
        const auto [cx, cy] = parse_pair(center_text, "--center");
        LoopSpec loop;
        loop.center = NuclearCoords::from_cartesian(cx, cy);
        loop.radius = radius;
        loop.n_points = n_points;
        const BerryMethod method = (method_text == "line")      ? BerryMethod::line_integral
                                   : (method_text == "holonomy") ? BerryMethod::holonomy
                                                                 : BerryMethod::both;
        const BerryResult r = berry_phase(m, loop, method, {}, berry_tol);
        json o;
        o["tau"] = r.tau;
        o["tau_signed"] = r.tau_signed;
        json perm = json::array();
        for (int i = 0; i < model_dim(m); ++i) perm.push_back(r.permutation[i] + 1);
        o["permutation"] = perm;
        o["n_points"] = r.n_points_used;
        o["circuits"] = r.circuits;
        o["branch"] = r.branch + 1;
        o["converged"] = r.converged;
        o["method"] = method_text;
        o["method_spread"] = r.method_spread;
        o["gauge"] = r.gauge;
        emit(out_path, o.dump(2) + "\n");
        return 0;
    }

    if (nac->parsed()) {
        const ModelParams m = load_params_file(params_path);
        const auto [qx, qy] = parse_pair(point_text, "--point");
        const auto q = NuclearCoords::from_cartesian(qx, qy);
        const NacField f = numeric_nac(
            m, q, step, gauge_text == "raw" ? NacGauge::raw : NacGauge::single_valued);
        json o;
        o["qx"] = qx;
        o["qy"] = qy;
        o["step"] = step;
        o["gauge"] = (f.gauge == NacGauge::raw) ? "raw" : "single_valued";
        json entries;
        for (int r = 0; r < f.dim; ++r) {
            for (int c = 0; c < f.dim; ++c) {
                const std::string key = "f" + std::to_string(r + 1) + std::to_string(c + 1);
                const auto [frho, fphi] = nac_polar_entry(f, r, c, q.phi);
                entries[key] = json{{"x", complex_json(f.fx(r, c))},
                                    {"y", complex_json(f.fy(r, c))},
                                    {"rho", complex_json(frho)},
                                    {"phi", complex_json(fphi)}};
            }
        }
        o["f"] = entries;
        emit(out_path, o.dump(2) + "\n");
        return 0;
    }

    if (findep->parsed() || seams->parsed()) {
        const ModelParams m = load_params_file(params_path);
        const auto [rlo, rhi] = parse_range(rho_text, "--rho");
        const auto [plo, phi] = parse_range(phi_text, "--phi");
        PolarRegion region;
        region.rho_min = rlo;
        region.rho_max = rhi;
        region.phi_min = plo * kRadPerDeg;
        region.phi_max = phi * kRadPerDeg;
        TopologyOptions opts;
        opts.grid_d_rho = d_rho;
        opts.grid_d_phi = d_phi_deg * kRadPerDeg;
        if (findep->parsed()) {
            const auto points = find_exceptional_points(m, region, opts);
            emit(out_path, format_degeneracies_json(points));
        } else {
            const auto scan = trace_seams(m, region, opts);
            std::string out = format_seams_csv(scan);
            if (scan.im_degenerate_everywhere) {
                out += "# im-degenerate: bound-state parameters, Im(V1-V2) = 0 everywhere\n";
            }
            emit(out_path, out);
        }
        return 0;
    }

    if (fit->parsed()) {
        const auto samples = parse_slice_csv(read_file(data_path));
        FitResult result;
        if (model_text == "jt") {
            result = fit_jt_slice(samples);
        } else {
            SliceFitOptions opts;
            opts.weight_re = weight_re;
            opts.weight_im = weight_im;
            if (!init_path.empty()) {
                const ModelParams init = load_params_file(init_path);
                const auto* p = std::get_if<PjtParams>(&init);
                if (p == nullptr) throw SchemaError("fit: --init must be a pjt parameter file");
                PjtParams start = *p;
                result = fit_pjt_slice(samples, order, &start, opts);
            } else {
                result = fit_pjt_slice(samples, order, nullptr, opts);
            }
        }
        emit(out_path, format_fit_json(result));
        return result.converged ? 0 : 3;
    }

    if (bwfit->parsed()) {
        const auto curve = parse_timedelay_csv(read_file(data_path));
        const auto result = fit_time_delay(curve, n_res);
        emit(out_path, format_bw_fit_json(result));
        return result.converged ? 0 : 3;
    }

    if (synth->parsed()) {
        const ModelParams m = load_params_file(params_path);
        const GridAxis axis = parse_axis(qx_text, "--qx");
        SynthSpec spec;
        spec.sigma = sigma;
        spec.seed = seed;
        spec.v_ion = v_ion;
        for (int i = 0; i < axis.n; ++i) {
            spec.qx.push_back((axis.n == 1) ? axis.lo
                                            : axis.lo + i * (axis.hi - axis.lo) / (axis.n - 1));
        }
        emit(out_path, format_slice_csv(synth_data(m, spec)));
        return 0;
    }

    if (validate->parsed()) {
        json issues = json::array();
        for (const auto& file : validate_files) {
            const auto report = validate_file(file);
            for (const auto& issue : report.issues) {
                issues.push_back(
                    json{{"file", issue.file}, {"row", issue.row}, {"message", issue.message}});
            }
        }
        json o;
        o["issues"] = issues;
        o["ok"] = issues.empty();
        emit(out_path, o.dump(2) + "\n");
        return issues.empty() ? 0 : 2;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const SchemaError& e) {
        json err{{"error", {{"type", "schema"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const DomainError& e) {
        json err{{"error", {{"type", "domain"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const UnsupportedRegionError& e) {
        json err{{"error", {{"type", "unsupported_region"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const Error& e) {
        json err{{"error", {{"type", "numerical"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        json err{{"error", {{"type", "internal"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 3;
    }
}
