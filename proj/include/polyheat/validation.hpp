#pragma once

#include "polyheat/validation/common.hpp"
#include "polyheat/validation/correspondence.hpp"
#include "polyheat/validation/gauss.hpp"
#include "polyheat/validation/green.hpp"
#include "polyheat/validation/multiplier.hpp"
