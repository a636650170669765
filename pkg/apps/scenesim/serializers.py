from rest_framework import serializers

from apps.geometry.camera import Intrinsics
from apps.geometry.pose import Pose, so3_exp
from apps.system.exceptions import BadSpecError, DepthMaskError

from .scene import LABELS, SHAPES, Background, SceneObject, SceneSpec


def _vector(length):
    return serializers.ListField(child=serializers.FloatField(), min_length=length, max_length=length)


class IntrinsicsSerializer(serializers.Serializer):
    """相机内参"""
    fx = serializers.FloatField(min_value=0)
    fy = serializers.FloatField(min_value=0)
    cx = serializers.FloatField()
    cy = serializers.FloatField()
    width = serializers.IntegerField(min_value=2)
    height = serializers.IntegerField(min_value=2)


class BackgroundSerializer(serializers.Serializer):
    """背景平面"""
    distance = serializers.FloatField(min_value=0)
    texture_seed = serializers.IntegerField(default=0)
    frequency = serializers.FloatField(default=1.0, min_value=0)
    color = serializers.ListField(
        child=serializers.FloatField(min_value=0, max_value=1), min_length=3, max_length=3,
        required=False, allow_null=True, default=None,
    )


class SceneObjectSerializer(serializers.Serializer):
    """平面物体"""
    shape = serializers.ChoiceField(choices=SHAPES)
    size = serializers.ListField(child=serializers.FloatField(min_value=0), min_length=1, max_length=2)
    depth = serializers.FloatField(min_value=0)
    center = _vector(2)
    velocity = _vector(3)
    label = serializers.ChoiceField(choices=list(LABELS))
    texture_seed = serializers.IntegerField(default=1)
    frequency = serializers.FloatField(default=2.0, min_value=0)
    color = serializers.ListField(
        child=serializers.FloatField(min_value=0, max_value=1), min_length=3, max_length=3,
        required=False, allow_null=True, default=None,
    )

    def validate_size(self, value):
        if len(value) == 1:
            value = [value[0], value[0]]
        return value

    def validate(self, attrs):
        """
        圆盘只有一个半径
        """
        if attrs['shape'] == 'disk' and attrs['size'][0] != attrs['size'][1]:
            raise serializers.ValidationError({'size': '圆盘的两个尺寸必须相同（半径）'})
        return attrs


class CameraMotionSerializer(serializers.Serializer):
    """每帧相机运动：旋转向量与平移"""
    rotation = _vector(3)
    translation = _vector(3)


class SceneSpecSerializer(serializers.Serializer):
    name = serializers.CharField(default='custom')
    intrinsics = IntrinsicsSerializer()
    background = BackgroundSerializer()
    objects = SceneObjectSerializer(many=True, required=False, default=list)
    camera_motion = CameraMotionSerializer()
    frames = serializers.ListField(child=serializers.IntegerField(), min_length=2, default=[-1, 0, 1])


def _tuple_or_none(value):
    return tuple(value) if value is not None else None


def load_scene_spec(data):
    """校验 JSON 字典并构造 SceneSpec；任何不合法的输入都抛出 BadSpecError"""
    serializer = SceneSpecSerializer(data=data)
    if not serializer.is_valid():
        raise BadSpecError('场景描述不合法', data=serializer.errors)
    attrs = serializer.validated_data
    try:
        motion = attrs['camera_motion']
        return SceneSpec(
            intrinsics=Intrinsics(**attrs['intrinsics']),
            background=Background(
                distance=attrs['background']['distance'],
                texture_seed=attrs['background']['texture_seed'],
                frequency=attrs['background']['frequency'],
                color=_tuple_or_none(attrs['background'].get('color')),
            ),
            objects=[
                SceneObject(
                    shape=obj['shape'],
                    size=tuple(obj['size']),
                    depth=obj['depth'],
                    center=tuple(obj['center']),
                    velocity=tuple(obj['velocity']),
                    label=obj['label'],
                    texture_seed=obj['texture_seed'],
                    frequency=obj['frequency'],
                    color=_tuple_or_none(obj.get('color')),
                )
                for obj in attrs['objects']
            ],
            camera_motion=Pose(so3_exp(motion['rotation']), motion['translation']),
            frames=attrs['frames'],
            name=attrs['name'],
        )
    except BadSpecError:
        raise
    except DepthMaskError as exc:
        raise BadSpecError(exc.message, data=exc.data) from exc
