#pragma once

#include <string>
#include <vector>

#include "vibronic/fitting.hpp"
#include "vibronic/topology.hpp"

namespace vibronic {

/// Round-trip-safe decimal formatting (17 significant digits).
std::string format_g17(double v);

/// Parameter file schema:
///   {"model": "pjt"|"jt", "order": 2|3, "params": {name: [re, im], ...}}
/// Complex values are always two-element [re, im] arrays; energies Hartree.
/// Unknown keys anywhere are rejected.
ModelParams parse_params_json(const std::string& text);
std::string format_params_json(const ModelParams& m);

ModelParams load_params_file(const std::string& path);

/// Slice-data CSV: header "qx,branch,eps_n,gamma_n,v_ion"; branch is 1..3 or
/// "a1" for samples of ambiguous A1 assignment.
std::vector<ResonanceSample> parse_slice_csv(const std::string& text);
std::string format_slice_csv(const std::vector<ResonanceSample>& samples);

/// Time-delay CSV: header "e,ddelta_de".
TimeDelayCurve parse_timedelay_csv(const std::string& text);
std::string format_timedelay_csv(const TimeDelayCurve& curve);

std::string format_surface_csv(const SurfaceTable& table);

std::string format_seams_csv(const SeamScan& scan);

std::string format_degeneracies_json(const std::vector<DegeneracyPoint>& points);

std::string format_fit_json(const FitResult& fit);

std::string format_bw_fit_json(const BwFitResult& fit);

/// File/schema validation without executing computations.
struct ValidationIssue {
    std::string file;
    int row = 0;  // 1-based data row where applicable, 0 for file-level
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

ValidationReport validate_params_text(const std::string& text, const std::string& name);
ValidationReport validate_slice_text(const std::string& text, const std::string& name);
ValidationReport validate_timedelay_text(const std::string& text, const std::string& name);

/// Dispatch on file content (JSON object -> params, CSV header -> data file).
ValidationReport validate_file(const std::string& path);

std::string read_file(const std::string& path);

/// Write via temp file + rename so readers never observe partial output.
void atomic_write(const std::string& path, const std::string& content);

/// Grid specification string, e.g. "qx=-0.5:0.5:101,qy=-0.5:0.5:101" or
/// "rho=0:0.5:51,phi=0:360:73" (angles in degrees at this boundary).
GridSpec parse_grid_spec(const std::string& text);

}  // namespace vibronic
