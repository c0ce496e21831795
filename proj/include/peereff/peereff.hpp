#pragma once

#include "peereff/annealing.hpp"
#include "peereff/connection.hpp"
#include "peereff/csv.hpp"
#include "peereff/multi_connection.hpp"
#include "peereff/random.hpp"
#include "peereff/simulation.hpp"
