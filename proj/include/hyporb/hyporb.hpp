#pragma once

#include "hyporb/action.hpp"
#include "hyporb/asymptotics.hpp"
#include "hyporb/continuation.hpp"
#include "hyporb/errors.hpp"
#include "hyporb/io.hpp"
#include "hyporb/loop.hpp"
#include "hyporb/minimize.hpp"
#include "hyporb/orbit.hpp"
#include "hyporb/potential.hpp"
#include "hyporb/vec.hpp"
