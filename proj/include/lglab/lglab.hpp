#pragma once

#include "errors.hpp"
#include "qubit_algebra.hpp"
#include "quantum_core.hpp"
#include "lg_protocol.hpp"
#include "scenario.hpp"
#include "lg_expressions.hpp"
#include "macrorealism.hpp"
#include "explorer.hpp"
#include "config_io.hpp"
#include "verification.hpp"
