#pragma once

#define FREEBROWN_VERSION "0.1.0"
