#pragma once

#include "lagdesc/error.hpp"
#include "lagdesc/fieldparse.hpp"
#include "lagdesc/systems.hpp"
#include "lagdesc/integrate.hpp"
#include "lagdesc/descriptors.hpp"
#include "lagdesc/fieldscan.hpp"
#include "lagdesc/verify.hpp"
#include "lagdesc/serialize.hpp"
