#pragma once

#include "uie2i/cli.hpp"
#include "uie2i/config.hpp"
#include "uie2i/eval.hpp"
#include "uie2i/review_service.hpp"
