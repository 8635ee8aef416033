import numpy as np
import pytest
from PIL import Image

# bundled scikit-image photographs that load without network access;
# synthetic patterns (checkerboard, logo, color wheel) deliberately excluded
PHOTO_NAMES = [
    "astronaut",
    "brick",
    "camera",
    "cat",
    "chelsea",
    "coffee",
    "coins",
    "gravel",
    "hubble_deep_field",
    "immunohistochemistry",
    "moon",
    "page",
    "rocket",
]


def load_photo_arrays():
    import skimage.data as data

    photos = []
    for name in PHOTO_NAMES:
        arr = getattr(data, name)()
        if arr.ndim == 2:
            arr = np.repeat(arr[..., None], 3, axis=2)
        photos.append((name, np.ascontiguousarray(arr[..., :3])))
    return photos


@pytest.fixture(scope="session")
def photo_dir(tmp_path_factory):
    """Directory of natural photographs saved as PNG at native resolution."""
    root = tmp_path_factory.mktemp("photos")
    for name, arr in load_photo_arrays():
        Image.fromarray(arr, mode="RGB").save(root / f"{name}.png")
    return root


@pytest.fixture(scope="session")
def photos_512(photo_dir):
    """At least ten natural photographs as 512x512 unit-interval buffers."""
    from barrelwarp.pipeline import ingest_image

    return [ingest_image(path, 512) for path in sorted(photo_dir.iterdir())]
