#pragma once

// Convenience include for the whole library.

#include "neqsteady/errors.hpp"
#include "neqsteady/log.hpp"
#include "neqsteady/format.hpp"
#include "neqsteady/system.hpp"
#include "neqsteady/reservoir.hpp"
#include "neqsteady/quadrature.hpp"
#include "neqsteady/rates.hpp"
#include "neqsteady/generator.hpp"
#include "neqsteady/currents.hpp"
#include "neqsteady/three_level.hpp"
#include "neqsteady/linear_response.hpp"
#include "neqsteady/kms.hpp"
#include "neqsteady/field_kms.hpp"
#include "neqsteady/scenario.hpp"
