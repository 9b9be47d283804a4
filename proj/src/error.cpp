#include "gnsfde/error.hpp"

namespace gnsfde {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Config: return "config";
        case ErrorKind::Input: return "input";
        case ErrorKind::Usage: return "usage";
        case ErrorKind::Step: return "step";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::Estimation: return "estimation";
    }
    return "unknown";
}

}  // namespace gnsfde
