"""gelray: physically-based optical simulation of camera-in-elastomer tactile sensors.

Renders the sensor camera image from emitter, support-structure, and deformed
elastomer models with Monte Carlo light transport (path tracing and
bidirectional path tracing), deforms the elastomer heightfield under contact,
and recovers scene parameters by inverse rendering.
"""

__version__ = "0.1.0"
