#pragma once

#include "phasync/chain.hpp"
#include "phasync/config.hpp"
#include "phasync/csv.hpp"
#include "phasync/errors.hpp"
#include "phasync/grid.hpp"
#include "phasync/harness.hpp"
#include "phasync/image.hpp"
#include "phasync/image_io.hpp"
#include "phasync/integrator.hpp"
#include "phasync/lattice.hpp"
#include "phasync/phase.hpp"
#include "phasync/rossler.hpp"
#include "phasync/saliency.hpp"
#include "phasync/scene.hpp"
#include "phasync/version.hpp"
