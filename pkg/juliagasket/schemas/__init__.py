from juliagasket.schemas.gluing import GluingTable
from juliagasket.schemas.invocation import Invocation
from juliagasket.schemas.map_spec import MapSpec
from juliagasket.schemas.orbit import ClassificationReport, OrbitAnalysis
from juliagasket.schemas.preimage import PreimageRoot, PreimageSet
from juliagasket.schemas.render import RenderConfig
from juliagasket.schemas.renorm import RenormSolution, ScanResult
from juliagasket.schemas.spectrum import SpectralReport

__all__ = [
    "ClassificationReport",
    "GluingTable",
    "Invocation",
    "MapSpec",
    "OrbitAnalysis",
    "PreimageRoot",
    "PreimageSet",
    "RenderConfig",
    "RenormSolution",
    "ScanResult",
    "SpectralReport",
]
