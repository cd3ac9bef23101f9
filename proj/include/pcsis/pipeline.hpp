#pragma once

#include <optional>
#include <string>

#include "pcsis/certify.hpp"
#include "pcsis/config.hpp"
#include "pcsis/lp.hpp"
#include "pcsis/weight_learn.hpp"

namespace pcsis {

SystemDescriptor describe_system(const RunConfig& config);

enum class SynthesisStatus { Valid, Void, LearningFailed };

std::string to_string(SynthesisStatus status);

struct SynthesisResult {
    SynthesisStatus status = SynthesisStatus::Void;
    std::optional<PacCertificate> certificate;  // absent when learning failed
    std::optional<IterationTrace> trace;        // csis only
    std::optional<LinearProgram> final_lp;      // when requested
    SampleSet scenario;
    std::string log;
};

struct SynthesisOptions {
    bool keep_final_lp = false;
    /// Receives the stage name as each stage starts; useful for error reports.
    std::string* stage = nullptr;
};

/// Full run: m, N, (csis: X^L and weight learning), fresh scenario samples,
/// min-lambda LP, tie-break LP when lambda* <= tolerance, volume estimate and
/// certificate.  LP failures raise SolverError.
SynthesisResult synthesize(const RunConfig& config, const SolverBackend& backend,
                           const SynthesisOptions& options = {});

}  // namespace pcsis
