#ifndef REEBLAB_ERRORS_HPP
#define REEBLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace reeb {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };

// geometry
struct DegenerateGradient : Error { using Error::Error; };
struct FrameDegenerate : Error { using Error::Error; };
struct NotTangent : Error { using Error::Error; };

// flow
struct StepFailure : Error { using Error::Error; };
struct GridTooCoarse : Error { using Error::Error; };

// spectral-index
struct NonSymmetricCoefficient : Error { using Error::Error; };
struct WindingNotInteger : Error { using Error::Error; };
struct WindowUnresolved : Error { using Error::Error; };
struct WindowTooNarrow : Error { using Error::Error; };
struct GapStraddle : Error { using Error::Error; };
struct SlowConvergence : Error { using Error::Error; };
struct DegenerateSystem : Error { using Error::Error; };

// knots
struct CurvesTooClose : Error { using Error::Error; };
struct DegenerateProjection : Error { using Error::Error; };
struct EpsilonInstability : Error { using Error::Error; };
struct ComponentsIntersect : Error { using Error::Error; };

// cycles
struct NonTransverseCrossing : Error { using Error::Error; };
struct NoRecurrence : Error { using Error::Error; };
struct ChordCrossesLink : Error { using Error::Error; };

// sections
struct NotSplitSystem : Error { using Error::Error; };
struct StokesMismatch : Error { using Error::Error; };

} // namespace reeb

#endif
