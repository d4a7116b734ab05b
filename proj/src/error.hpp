#pragma once

#include <stdexcept>
#include <string>

namespace optiseq {

// One code per failure class; mirrored 1:1 by the C API status values.
enum class Errc {
    ok = 0,
    invalid_argument,
    template_error,
    invalid_ordering,
    cap_exceeded,
    parse_error,
    schema_error,
    backend_unavailable,
    logprobs_unsupported,
    token_boundary_mismatch,
    empty_output,
    empty_sequence,
    empty_gold,
    empty_record_set,
    all_generations_empty,
    dimension_mismatch,
    zero_vector,
    io_error,
    verification_mismatch,
    internal,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
  public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, std::string message) {
    throw Error(code, std::move(message));
}

} // namespace optiseq
