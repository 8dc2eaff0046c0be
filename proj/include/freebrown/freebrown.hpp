#pragma once

#include "freebrown/error.hpp"
#include "freebrown/io.hpp"
#include "freebrown/measures.hpp"
#include "freebrown/numeric.hpp"
#include "freebrown/rmt.hpp"
#include "freebrown/semigroup.hpp"
#include "freebrown/stable.hpp"
#include "freebrown/transforms.hpp"
#include "freebrown/verify.hpp"
#include "freebrown/version.hpp"
