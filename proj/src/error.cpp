#include "error.hpp"

namespace optiseq {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::ok: return "ok";
        case Errc::invalid_argument: return "invalid_argument";
        case Errc::template_error: return "template_error";
        case Errc::invalid_ordering: return "invalid_ordering";
        case Errc::cap_exceeded: return "cap_exceeded";
        case Errc::parse_error: return "parse_error";
        case Errc::schema_error: return "schema_error";
        case Errc::backend_unavailable: return "backend_unavailable";
        case Errc::logprobs_unsupported: return "logprobs_unsupported";
        case Errc::token_boundary_mismatch: return "token_boundary_mismatch";
        case Errc::empty_output: return "empty_output";
        case Errc::empty_sequence: return "empty_sequence";
        case Errc::empty_gold: return "empty_gold";
        case Errc::empty_record_set: return "empty_record_set";
        case Errc::all_generations_empty: return "all_generations_empty";
        case Errc::dimension_mismatch: return "dimension_mismatch";
        case Errc::zero_vector: return "zero_vector";
        case Errc::io_error: return "io_error";
        case Errc::verification_mismatch: return "verification_mismatch";
        case Errc::internal: return "internal";
    }
    return "unknown";
}

} // namespace optiseq
