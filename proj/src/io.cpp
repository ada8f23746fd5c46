#include "vibronic/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vibronic {

using nlohmann::json;

namespace {

constexpr double kRadPerDeg = 3.14159265358979323846 / 180.0;

cdouble parse_complex(const json& j, const std::string& name) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw SchemaError("params: '" + name + "' must be a two-element [re, im] array");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json complex_json(cdouble z) { return json::array({z.real(), z.imag()}); }

const std::vector<std::string>& pjt_keys(int order) {
    static const std::vector<std::string> second{"eps_E", "eps_A", "omega", "k", "g", "alpha"};
    static const std::vector<std::string> third{"eps_E", "eps_A", "omega", "k",
                                                "g",     "beta",  "nu",    "mu",
                                                "alpha"};
    return order == 3 ? third : second;
}

const std::vector<std::string>& jt_keys() {
    static const std::vector<std::string> keys{"eps_E", "omega", "k", "g"};
    return keys;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
    }
    return fields;
}

double parse_number(const std::string& s, const std::string& what, int row) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw SchemaError("row " + std::to_string(row) + ": bad " + what + " value '" + s + "'");
    }
}

}  // namespace

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ModelParams parse_params_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("params: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("params: top level must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "model" && key != "order" && key != "params") {
            throw SchemaError("params: unknown key '" + key + "'");
        }
    }
    if (!j.contains("model") || !j["model"].is_string()) {
        throw SchemaError("params: missing or non-string 'model'");
    }
    const std::string model = j["model"].get<std::string>();
    int order = 2;
    if (j.contains("order")) {
        if (!j["order"].is_number_integer()) throw SchemaError("params: 'order' must be integer");
        order = j["order"].get<int>();
    }
    if (order != 2 && order != 3) throw SchemaError("params: 'order' must be 2 or 3");
    if (!j.contains("params") || !j["params"].is_object()) {
        throw SchemaError("params: missing 'params' object");
    }
    const json& p = j["params"];

    const auto get = [&](const std::string& name) { return parse_complex(p.at(name), name); };

    if (model == "jt") {
        if (order != 2) throw SchemaError("params: model 'jt' supports order 2 only");
        for (const auto& [key, value] : p.items()) {
            (void)value;
            if (std::find(jt_keys().begin(), jt_keys().end(), key) == jt_keys().end()) {
                throw SchemaError("params: unknown key '" + key + "' for model 'jt'");
            }
        }
        JtParams out;
        try {
            out.eps_E = get("eps_E");
            out.omega = get("omega");
            out.k = get("k");
            out.g = get("g");
        } catch (const json::out_of_range&) {
            throw SchemaError("params: model 'jt' requires eps_E, omega, k, g");
        }
        out.validate();
        return out;
    }
    if (model != "pjt") throw SchemaError("params: 'model' must be 'pjt' or 'jt'");

    const auto& keys = pjt_keys(order);
    for (const auto& [key, value] : p.items()) {
        (void)value;
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw SchemaError("params: unknown key '" + key + "' for model 'pjt' order " +
                              std::to_string(order));
        }
    }
    PjtParams out;
    out.order = order;
    try {
        out.eps_E = get("eps_E");
        out.eps_A = get("eps_A");
        out.omega = get("omega");
        out.k = get("k");
        out.g = get("g");
        out.alpha = get("alpha");
        if (order == 3) {
            out.beta = get("beta");
            out.nu = get("nu");
            out.mu = get("mu");
        }
    } catch (const json::out_of_range&) {
        throw SchemaError("params: missing required pjt parameter");
    }
    out.validate();
    return out;
}

std::string format_params_json(const ModelParams& m) {
    json root;
    json p;
    if (const auto* jt = std::get_if<JtParams>(&m)) {
        root["model"] = "jt";
        root["order"] = 2;
        p["eps_E"] = complex_json(jt->eps_E);
        p["omega"] = complex_json(jt->omega);
        p["k"] = complex_json(jt->k);
        p["g"] = complex_json(jt->g);
    } else {
        const auto& pp = std::get<PjtParams>(m);
        root["model"] = "pjt";
        root["order"] = pp.order;
        p["eps_E"] = complex_json(pp.eps_E);
        p["eps_A"] = complex_json(pp.eps_A);
        p["omega"] = complex_json(pp.omega);
        p["k"] = complex_json(pp.k);
        p["g"] = complex_json(pp.g);
        p["alpha"] = complex_json(pp.alpha);
        if (pp.order == 3) {
            p["beta"] = complex_json(pp.beta);
            p["nu"] = complex_json(pp.nu);
            p["mu"] = complex_json(pp.mu);
        }
    }
    root["params"] = p;
    return root.dump(2) + "\n";
}

ModelParams load_params_file(const std::string& path) {
    return parse_params_json(read_file(path));
}

std::vector<ResonanceSample> parse_slice_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("slice csv: empty file");
    const auto header = split_csv_line(line);
    const std::vector<std::string> expect{"qx", "branch", "eps_n", "gamma_n", "v_ion"};
    if (header != expect) {
        throw SchemaError("slice csv: header must be 'qx,branch,eps_n,gamma_n,v_ion'");
    }
    std::vector<ResonanceSample> out;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) {
            throw SchemaError("slice csv: row " + std::to_string(row) + ": expected 5 columns");
        }
        ResonanceSample s;
        s.q = NuclearCoords::from_cartesian(parse_number(f[0], "qx", row), 0.0);
        if (f[1] == "a1") {
            s.branch = kBranchAmbiguousA1;
        } else {
            const double b = parse_number(f[1], "branch", row);
            if (b != 1.0 && b != 2.0 && b != 3.0) {
                throw SchemaError("slice csv: row " + std::to_string(row) +
                                  ": branch must be 1, 2, 3 or 'a1'");
            }
            s.branch = static_cast<int>(b);
        }
        s.eps_n = parse_number(f[2], "eps_n", row);
        s.gamma_n = parse_number(f[3], "gamma_n", row);
        s.v_ion = parse_number(f[4], "v_ion", row);
        out.push_back(s);
    }
    return out;
}

std::string format_slice_csv(const std::vector<ResonanceSample>& samples) {
    std::string out = "qx,branch,eps_n,gamma_n,v_ion\n";
    for (const auto& s : samples) {
        out += format_g17(s.q.qx);
        out += ',';
        out += (s.branch == kBranchAmbiguousA1) ? std::string("a1") : std::to_string(s.branch);
        out += ',';
        out += format_g17(s.eps_n);
        out += ',';
        out += format_g17(s.gamma_n);
        out += ',';
        out += format_g17(s.v_ion);
        out += '\n';
    }
    return out;
}

TimeDelayCurve parse_timedelay_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("time-delay csv: empty file");
    const auto header = split_csv_line(line);
    const std::vector<std::string> expect{"e", "ddelta_de"};
    if (header != expect) {
        throw SchemaError("time-delay csv: header must be 'e,ddelta_de'");
    }
    TimeDelayCurve out;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 2) {
            throw SchemaError("time-delay csv: row " + std::to_string(row) +
                              ": expected 2 columns");
        }
        out.energy.push_back(parse_number(f[0], "e", row));
        out.ddelta_de.push_back(parse_number(f[1], "ddelta_de", row));
    }
    return out;
}

std::string format_timedelay_csv(const TimeDelayCurve& curve) {
    std::string out = "e,ddelta_de\n";
    for (std::size_t i = 0; i < curve.energy.size(); ++i) {
        out += format_g17(curve.energy[i]);
        out += ',';
        out += format_g17(curve.ddelta_de[i]);
        out += '\n';
    }
    return out;
}

std::string format_surface_csv(const SurfaceTable& table) {
    std::string out;
    if (table.dim == 3) {
        out = "qx,qy,re_v1,im_v1,re_v2,im_v2,re_v3,im_v3,rigidity\n";
    } else {
        out = "qx,qy,re_v1,im_v1,re_v2,im_v2,rigidity\n";
    }
    for (const auto& sp : table.points) {
        out += format_g17(sp.q.qx);
        out += ',';
        out += format_g17(sp.q.qy);
        for (int b = 0; b < table.dim; ++b) {
            out += ',';
            out += format_g17(sp.v[b].real());
            out += ',';
            out += format_g17(sp.v[b].imag());
        }
        out += ',';
        out += format_g17(sp.rigidity);
        out += '\n';
    }
    return out;
}

std::string format_seams_csv(const SeamScan& scan) {
    std::string out = "curve,kind,qx,qy,rho,phi_deg\n";
    int id = 0;
    for (const auto& curve : scan.curves) {
        const char* kind = (curve.kind == SeamKind::re_seam) ? "re" : "im";
        for (const auto& q : curve.points) {
            out += std::to_string(id);
            out += ',';
            out += kind;
            out += ',';
            out += format_g17(q.qx);
            out += ',';
            out += format_g17(q.qy);
            out += ',';
            out += format_g17(q.rho);
            out += ',';
            out += format_g17(q.phi / kRadPerDeg);
            out += '\n';
        }
        ++id;
    }
    return out;
}

std::string format_degeneracies_json(const std::vector<DegeneracyPoint>& points) {
    json arr = json::array();
    for (const auto& p : points) {
        json o;
        o["kind"] = (p.kind == DegeneracyKind::conical_intersection) ? "conical_intersection"
                                                                     : "exceptional_point";
        o["qx"] = p.coords.qx;
        o["qy"] = p.coords.qy;
        o["rho"] = p.coords.rho;
        o["phi_deg"] = p.coords.phi / kRadPerDeg;
        o["branches"] = json::array({p.branches.first + 1, p.branches.second + 1});
        o["residual"] = p.residual;
        o["rigidity"] = p.rigidity;
        o["extrapolated"] = p.extrapolated;
        arr.push_back(o);
    }
    json root;
    root["degeneracies"] = arr;
    root["count"] = points.size();
    return root.dump(2) + "\n";
}

std::string format_fit_json(const FitResult& fit) {
    json root = json::parse(format_params_json(fit.params));
    root["residual"] = fit.residual;
    root["iterations"] = fit.iterations;
    root["converged"] = fit.converged;
    root["uncertainty"] = fit.uncertainty;
    root["notes"] = fit.notes;
    return root.dump(2) + "\n";
}

std::string format_bw_fit_json(const BwFitResult& fit) {
    json root;
    json res = json::array();
    for (const auto& [eps, gamma] : fit.resonances) {
        res.push_back(json{{"eps", eps}, {"gamma", gamma}});
    }
    root["resonances"] = res;
    root["bg"] = fit.bg;
    root["residual"] = fit.residual;
    root["iterations"] = fit.iterations;
    root["converged"] = fit.converged;
    root["uncertainty"] = fit.uncertainty;
    root["notes"] = fit.notes;
    return root.dump(2) + "\n";
}

namespace {

ValidationReport catching_validation(const std::string& name,
                                     const std::function<void()>& body) {
    ValidationReport report;
    try {
        body();
    } catch (const SchemaError& e) {
        report.issues.push_back({name, 0, e.what()});
    } catch (const Error& e) {
        report.issues.push_back({name, 0, e.what()});
    }
    return report;
}

}  // namespace

ValidationReport validate_params_text(const std::string& text, const std::string& name) {
    return catching_validation(name, [&] { parse_params_json(text); });
}

ValidationReport validate_slice_text(const std::string& text, const std::string& name) {
    ValidationReport report;
    std::vector<ResonanceSample> samples;
    try {
        samples = parse_slice_csv(text);
    } catch (const Error& e) {
        report.issues.push_back({name, 0, e.what()});
        return report;
    }
    int row = 1;
    for (const auto& s : samples) {
        ++row;
        if (s.gamma_n < 0.0) {
            report.issues.push_back({name, row, "gamma_n < 0"});
        }
        if (!std::isfinite(s.eps_n) || !std::isfinite(s.gamma_n) || !std::isfinite(s.v_ion)) {
            report.issues.push_back({name, row, "non-finite value"});
        }
    }
    return report;
}

ValidationReport validate_timedelay_text(const std::string& text, const std::string& name) {
    ValidationReport report;
    TimeDelayCurve curve;
    try {
        curve = parse_timedelay_csv(text);
    } catch (const Error& e) {
        report.issues.push_back({name, 0, e.what()});
        return report;
    }
    for (std::size_t i = 1; i < curve.energy.size(); ++i) {
        if (!(curve.energy[i] > curve.energy[i - 1])) {
            report.issues.push_back(
                {name, static_cast<int>(i) + 2, "energy grid not strictly increasing"});
        }
    }
    return report;
}

ValidationReport validate_file(const std::string& path) {
    const std::string text = read_file(path);
    // JSON object -> params file; otherwise dispatch on the CSV header.
    for (const char c : text) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r') continue;
        if (c == '{') return validate_params_text(text, path);
        break;
    }
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    const auto fields = split_csv_line(header);
    if (fields == std::vector<std::string>{"e", "ddelta_de"}) {
        return validate_timedelay_text(text, path);
    }
    return validate_slice_text(text, path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SchemaError("cannot open file for writing: " + tmp);
        out << content;
        if (!out) throw SchemaError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw SchemaError("rename failed: " + path);
    }
}

GridSpec parse_grid_spec(const std::string& text) {
    GridSpec spec;
    std::vector<std::pair<std::string, GridAxis>> axes;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw SchemaError("grid: expected name=lo:hi:n");
        const std::string name = part.substr(0, eq);
        const std::string rest = part.substr(eq + 1);
        std::array<std::string, 3> pieces;
        std::size_t start = 0;
        for (int i = 0; i < 3; ++i) {
            const auto colon = rest.find(':', start);
            if (i < 2 && colon == std::string::npos) {
                throw SchemaError("grid: axis '" + name + "' needs lo:hi:n");
            }
            pieces[i] = rest.substr(start, (i < 2 ? colon - start : std::string::npos));
            start = colon + 1;
        }
        GridAxis axis;
        axis.lo = parse_number(pieces[0], "grid lo", 0);
        axis.hi = parse_number(pieces[1], "grid hi", 0);
        const double nn = parse_number(pieces[2], "grid n", 0);
        if (nn < 1 || nn != std::floor(nn)) throw SchemaError("grid: n must be a positive integer");
        axis.n = static_cast<int>(nn);
        axes.emplace_back(name, axis);
    }
    if (axes.size() != 2) throw SchemaError("grid: expected exactly two axes");
    const auto& [n0, a0] = axes[0];
    const auto& [n1, a1] = axes[1];
    if (n0 == "qx" && n1 == "qy") {
        spec.polar = false;
        spec.axis_a = a0;
        spec.axis_b = a1;
    } else if (n0 == "rho" && n1 == "phi") {
        spec.polar = true;
        spec.axis_a = a0;
        spec.axis_b = a1;
        spec.axis_b.lo *= kRadPerDeg;  // CLI angles arrive in degrees
        spec.axis_b.hi *= kRadPerDeg;
    } else {
        throw SchemaError("grid: axes must be qx,qy or rho,phi");
    }
    if (spec.polar && spec.axis_a.lo < 0.0) throw SchemaError("grid: rho must be non-negative");
    return spec;
}

}  // namespace vibronic
