#pragma once

namespace sie {

/// Serial reference or OpenMP execution for the data-parallel loops.
enum class Exec { serial, parallel };

}  // namespace sie
