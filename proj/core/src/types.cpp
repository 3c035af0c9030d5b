#include "intersim/types.hpp"

// Validation lives in the headers; this TU anchors the library target.

namespace intersim {}
