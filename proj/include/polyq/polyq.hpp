#pragma once

#include "polyq/campaign.hpp"
#include "polyq/dynamics.hpp"
#include "polyq/embedding.hpp"
#include "polyq/errors.hpp"
#include "polyq/game.hpp"
#include "polyq/generators.hpp"
#include "polyq/io.hpp"
#include "polyq/matrix.hpp"
#include "polyq/mpd.hpp"
#include "polyq/projection.hpp"
#include "polyq/rates.hpp"
#include "polyq/rng.hpp"
