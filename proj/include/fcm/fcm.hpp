#pragma once

#include "fcm/analysis.hpp"
#include "fcm/dynamics.hpp"
#include "fcm/error.hpp"
#include "fcm/io.hpp"
#include "fcm/knowledge.hpp"
#include "fcm/map.hpp"
#include "fcm/matrix.hpp"
#include "fcm/scenario.hpp"
