#pragma once

#include "pcda/datagen.hpp"
#include "pcda/density.hpp"
#include "pcda/error.hpp"
#include "pcda/io.hpp"
#include "pcda/losses.hpp"
#include "pcda/matrix.hpp"
#include "pcda/nn.hpp"
#include "pcda/optimizer.hpp"
#include "pcda/report.hpp"
#include "pcda/rng.hpp"
#include "pcda/trainer.hpp"
