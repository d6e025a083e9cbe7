#pragma once

#include <stdexcept>
#include <string>

namespace ragbench {

/// Base class for every error raised by the harness.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented contract (bad schema, bad parameter, duplicate id).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Filesystem or encoding problem while reading/writing an artifact.
class IoError : public Error {
public:
    using Error::Error;
};

/// On-disk index file is malformed. The message is one of "bad magic",
/// "unsupported version", "truncated", "checksum mismatch", or a dim/format note.
class IndexFormatError : public Error {
public:
    using Error::Error;
};

/// A remote provider (chat, embedding, scorer) failed.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, int status, bool retryable)
        : Error(what), status_(status), retryable_(retryable) {}

    int status() const noexcept { return status_; }
    bool retryable() const noexcept { return retryable_; }

private:
    int status_;
    bool retryable_;
};

/// HTTP 401/403 from a provider. Never retried.
class AuthError : public ProviderError {
public:
    AuthError(const std::string& what, int status) : ProviderError(what, status, false) {}
};

/// Provider answered, but the body does not have the documented shape.
class MalformedResponseError : public ProviderError {
public:
    explicit MalformedResponseError(const std::string& what) : ProviderError(what, 0, false) {}
};

}  // namespace ragbench
