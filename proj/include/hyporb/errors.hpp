#pragma once

#include <stdexcept>
#include <string>

namespace hyporb {

// Base class for all library failures.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation requested at the origin, where every built-in potential is singular.
class singularity_error : public error {
public:
    using error::error;
};

// A loop node sits on the singularity, so the action is undefined.
class collision_error : public error {
public:
    using error::error;
};

// A circular-loop frame is not orthonormal.
class invalid_frame_error : public error {
public:
    using error::error;
};

// Bad arguments or configuration.
class validation_error : public error {
public:
    using error::error;
};

// The strong-force barrier could not be certified for the requested delta.
class inadmissible_delta_error : public error {
public:
    using error::error;
};

// A sampled scan could not bracket the quantity it was asked for.
class inconclusive_error : public error {
public:
    using error::error;
};

// A loop with zero seminorm cannot be rescaled to an orbit.
class degenerate_loop_error : public error {
public:
    using error::error;
};

// The orbit never crosses the requested recentering radius.
class recenter_error : public error {
public:
    using error::error;
};

// The orbit never enters the |u| <= L region.
class no_passage_error : public error {
public:
    using error::error;
};

// A comparison window exceeds an orbit's half period.
class invalid_window_error : public error {
public:
    using error::error;
};

// An operation needs far-field decay metadata the potential does not carry.
class unsupported_potential_error : public error {
public:
    using error::error;
};

// A required artifact file is missing.
class not_found_error : public error {
public:
    using error::error;
};

// A potential failed the required admissibility hypotheses.
class hypothesis_error : public error {
public:
    using error::error;
};

}  // namespace hyporb
