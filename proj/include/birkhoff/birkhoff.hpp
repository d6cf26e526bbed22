#pragma once

#include "birkhoff/config.hpp"
#include "birkhoff/coupling.hpp"
#include "birkhoff/errors.hpp"
#include "birkhoff/frequency.hpp"
#include "birkhoff/grid.hpp"
#include "birkhoff/lie.hpp"
#include "birkhoff/modes.hpp"
#include "birkhoff/nonlinearity.hpp"
#include "birkhoff/normal_form.hpp"
#include "birkhoff/polynomial.hpp"
#include "birkhoff/scan.hpp"
#include "birkhoff/simulate.hpp"
#include "birkhoff/state.hpp"
